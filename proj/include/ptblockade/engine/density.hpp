#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "ptblockade/linalg/matrix.hpp"
#include "ptblockade/model/operators.hpp"
#include "ptblockade/model/params.hpp"

namespace ptb {

/// State on the truncated cavity1 (x) cavity2 (x) mechanics space.
struct DensityMatrix {
    ComplexMatrix matrix;
    TruncationSpec dims;

    static DensityMatrix fock(const TruncationSpec& dims, std::size_t n1, std::size_t n2,
                              std::size_t nm)
    {
        dims.validate();
        if (n1 > dims.n1_max || n2 > dims.n2_max || nm > dims.nm_max) {
            throw InvalidParameters("DensityMatrix::fock: level outside truncation " +
                                    dims.to_string());
        }
        DensityMatrix rho{ComplexMatrix(dims.dimension(), dims.dimension()), dims};
        const std::size_t k = (n1 * (dims.n2_max + 1) + n2) * (dims.nm_max + 1) + nm;
        rho.matrix(k, k) = 1.0;
        return rho;
    }

    static DensityMatrix vacuum(const TruncationSpec& dims) { return fock(dims, 0, 0, 0); }

    complex trace() const { return ptb::trace(matrix); }

    /// Replaces the matrix by its Hermitian part; returns the Frobenius norm of the
    /// anti-Hermitian part that was removed.
    double symmetrize()
    {
        const std::size_t n = matrix.rows();
        double removed = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i; j < n; ++j) {
                const complex a = matrix(i, j), b = std::conj(matrix(j, i));
                const complex h = 0.5 * (a + b);
                removed += (i == j ? 1.0 : 2.0) * std::norm(0.5 * (a - b));
                matrix(i, j) = h;
                matrix(j, i) = std::conj(h);
            }
        }
        return std::sqrt(removed);
    }
};

/// Gershgorin lower bound on the smallest eigenvalue of a Hermitian matrix:
/// min_i (Re rho_ii - sum_{j != i} |rho_ij|). Negative values flag possible loss
/// of positivity.
inline double gershgorin_min_eig_bound(const ComplexMatrix& rho)
{
    double bound = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rho.rows(); ++i) {
        double off = 0.0;
        for (std::size_t j = 0; j < rho.cols(); ++j)
            if (j != i) off += std::abs(rho(i, j));
        bound = std::min(bound, rho(i, i).real() - off);
    }
    return bound;
}

/// Trace of an n x n matrix held as flat row-major storage.
inline complex trace_of(const std::vector<complex>& flat, std::size_t n)
{
    complex t{0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) t += flat[i * n + i];
    return t;
}

/// tr(o rho) in O(d^2).
inline complex expectation(const ComplexMatrix& o, const ComplexMatrix& rho)
{
    const std::size_t n = o.rows();
    complex s{0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) s += o(i, j) * rho(j, i);
    return s;
}

} // namespace ptb
