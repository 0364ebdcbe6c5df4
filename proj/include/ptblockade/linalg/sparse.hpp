#pragma once

#include <cstddef>
#include <vector>

#include "ptblockade/linalg/matrix.hpp"

namespace ptb {

/// Compressed-row view of an operator, used where the same matrix is applied
/// many times to dense states (Liouvillian right-hand sides).
class SparseMatrix {
public:
    SparseMatrix() = default;

    static SparseMatrix from_dense(const ComplexMatrix& m)
    {
        SparseMatrix s;
        s.rows_ = m.rows();
        s.cols_ = m.cols();
        s.row_start_.assign(1, 0);
        s.row_start_.reserve(m.rows() + 1);
        for (std::size_t i = 0; i < m.rows(); ++i) {
            for (std::size_t j = 0; j < m.cols(); ++j) {
                if (m(i, j) != complex{0.0, 0.0}) {
                    s.col_.push_back(j);
                    s.val_.push_back(m(i, j));
                }
            }
            s.row_start_.push_back(s.col_.size());
        }
        return s;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t nonzeros() const noexcept { return val_.size(); }

    ComplexMatrix to_dense() const
    {
        ComplexMatrix m(rows_, cols_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t k = row_start_[i]; k < row_start_[i + 1]; ++k) m(i, col_[k]) = val_[k];
        return m;
    }

    SparseMatrix adjoint() const { return from_dense(dagger(to_dense())); }

    /// out += s * this * x
    void multiply_add(const ComplexMatrix& x, complex s, ComplexMatrix& out) const
    {
        check_left(x, out);
        const std::size_t n = x.cols();
        for (std::size_t i = 0; i < rows_; ++i) {
            complex* dst = &out(i, 0);
            for (std::size_t k = row_start_[i]; k < row_start_[i + 1]; ++k) {
                const complex v = s * val_[k];
                const complex* src = &x(col_[k], 0);
                for (std::size_t c = 0; c < n; ++c) dst[c] += v * src[c];
            }
        }
    }

    /// out += s * x * this
    void right_multiply_add(const ComplexMatrix& x, complex s, ComplexMatrix& out) const
    {
        if (x.cols() != rows_ || out.rows() != x.rows() || out.cols() != cols_) {
            throw UsageError("right_multiply_add: shape mismatch " + x.shape() + " * (" +
                             std::to_string(rows_) + "x" + std::to_string(cols_) + ") into " +
                             out.shape());
        }
        for (std::size_t r = 0; r < x.rows(); ++r) {
            const complex* src = &x(r, 0);
            complex* dst = &out(r, 0);
            for (std::size_t i = 0; i < rows_; ++i) {
                const complex xv = s * src[i];
                if (xv == complex{0.0, 0.0}) continue;
                for (std::size_t k = row_start_[i]; k < row_start_[i + 1]; ++k)
                    dst[col_[k]] += xv * val_[k];
            }
        }
    }

    ComplexMatrix operator*(const ComplexMatrix& x) const
    {
        ComplexMatrix out(rows_, x.cols());
        multiply_add(x, 1.0, out);
        return out;
    }

    /// out += s * this * x * this^dagger, exploiting that jump operators have
    /// at most a few entries per row.
    void sandwich_add(const ComplexMatrix& x, complex s, ComplexMatrix& out) const
    {
        if (x.rows() != cols_ || x.cols() != cols_ || out.rows() != rows_ || out.cols() != rows_) {
            throw UsageError("sandwich_add: shape mismatch " + x.shape() + " into " + out.shape());
        }
        for (std::size_t i = 0; i < rows_; ++i) {
            for (std::size_t j = 0; j < rows_; ++j) {
                complex acc{0.0, 0.0};
                for (std::size_t p = row_start_[i]; p < row_start_[i + 1]; ++p) {
                    complex inner{0.0, 0.0};
                    for (std::size_t q = row_start_[j]; q < row_start_[j + 1]; ++q)
                        inner += x(col_[p], col_[q]) * std::conj(val_[q]);
                    acc += val_[p] * inner;
                }
                out(i, j) += s * acc;
            }
        }
    }

private:
    void check_left(const ComplexMatrix& x, const ComplexMatrix& out) const
    {
        if (x.rows() != cols_ || out.rows() != rows_ || out.cols() != x.cols()) {
            throw UsageError("multiply_add: shape mismatch (" + std::to_string(rows_) + "x" +
                             std::to_string(cols_) + ") * " + x.shape() + " into " + out.shape());
        }
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::size_t> row_start_{0};
    std::vector<std::size_t> col_;
    std::vector<complex> val_;
};

} // namespace ptb
