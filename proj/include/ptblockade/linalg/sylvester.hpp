#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "ptblockade/linalg/matrix.hpp"

namespace ptb {

/// Solves A X + X A^dagger = Y for X by Bartels-Stewart on the complex Schur form
/// A = U T U^dagger (Schur factorization from Eigen). The factorization is done once;
/// each solve is O(n^3). Near-resonant pairs (T_ii + conj(T_jj) ~ 0) are clamped to
/// `floor` in magnitude, so the result is only an approximate inverse there.
class LyapunovSolver {
public:
    explicit LyapunovSolver(const ComplexMatrix& a)
    {
        if (!a.is_square()) throw UsageError("LyapunovSolver: not square " + a.shape());
        n_ = static_cast<Eigen::Index>(a.rows());
        Eigen::MatrixXcd dense = detail::view(a);
        Eigen::ComplexSchur<Eigen::MatrixXcd> schur(dense);
        if (schur.info() != Eigen::Success) {
            throw std::runtime_error("LyapunovSolver: Schur decomposition did not converge");
        }
        u_ = schur.matrixU();
        t_ = schur.matrixT();
        t_rows_ = t_;
        double scale = 1.0;
        for (Eigen::Index i = 0; i < n_; ++i) scale = std::max(scale, std::abs(t_(i, i)));
        floor_ = 1e-13 * scale;
    }

    /// Eigenvalues of A in Schur order.
    std::vector<complex> eigenvalues() const
    {
        std::vector<complex> ev(static_cast<std::size_t>(n_));
        for (Eigen::Index i = 0; i < n_; ++i) ev[static_cast<std::size_t>(i)] = t_(i, i);
        return ev;
    }

    /// Largest real part of lambda_i + conj(lambda_j): the fastest growth rate of the
    /// map X -> A X + X A^dagger.
    double max_growth_rate() const
    {
        double m = -std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < n_; ++i) m = std::max(m, 2.0 * t_(i, i).real());
        return m;
    }

    ComplexMatrix solve(const ComplexMatrix& y) const
    {
        if (y.rows() != static_cast<std::size_t>(n_) || y.cols() != static_cast<std::size_t>(n_)) {
            throw UsageError("LyapunovSolver::solve: shape mismatch " + y.shape());
        }
        Eigen::MatrixXcd c = u_.adjoint() * detail::view(y) * u_;
        Eigen::MatrixXcd z(n_, n_);
        Eigen::VectorXcd rhs(n_);
        for (Eigen::Index j = n_ - 1; j >= 0; --j) {
            const Eigen::Index tail = n_ - 1 - j;
            rhs = c.col(j);
            if (tail > 0) rhs.noalias() -= z.rightCols(tail) * t_.row(j).tail(tail).adjoint();
            const complex shift = std::conj(t_(j, j));
            for (Eigen::Index i = n_ - 1; i >= 0; --i) {
                complex s = rhs(i);
                for (Eigen::Index l = i + 1; l < n_; ++l) s -= t_rows_(i, l) * z(l, j);
                complex d = t_(i, i) + shift;
                if (std::abs(d) < floor_) {
                    d = d == complex{0.0, 0.0} ? complex{floor_, 0.0} : floor_ * d / std::abs(d);
                }
                z(i, j) = s / d;
            }
        }
        ComplexMatrix x(y.rows(), y.cols());
        detail::view(x).noalias() = u_ * z * u_.adjoint();
        return x;
    }

private:
    Eigen::Index n_ = 0;
    Eigen::MatrixXcd u_;
    Eigen::MatrixXcd t_;
    Eigen::Matrix<complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> t_rows_;
    double floor_ = 0.0;
};

} // namespace ptb
