#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace ptb {

using complex = std::complex<double>;

/// Raised when operands have incompatible shapes.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Dense complex matrix, row-major.
class ComplexMatrix {
public:
    ComplexMatrix() = default;
    ComplexMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, complex{0.0, 0.0}) {}

    ComplexMatrix(std::initializer_list<std::initializer_list<complex>> init)
    {
        rows_ = init.size();
        cols_ = rows_ == 0 ? 0 : init.begin()->size();
        data_.reserve(rows_ * cols_);
        for (const auto& row : init) {
            if (row.size() != cols_) {
                throw UsageError("ComplexMatrix: ragged initializer list");
            }
            data_.insert(data_.end(), row.begin(), row.end());
        }
    }

    static ComplexMatrix identity(std::size_t n)
    {
        ComplexMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool is_square() const noexcept { return rows_ == cols_; }

    complex& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
    const complex& operator()(std::size_t i, std::size_t j) const noexcept
    {
        return data_[i * cols_ + j];
    }

    std::span<complex> values() noexcept { return data_; }
    std::span<const complex> values() const noexcept { return data_; }
    std::vector<complex>& storage() noexcept { return data_; }
    const std::vector<complex>& storage() const noexcept { return data_; }

    std::string shape() const
    {
        return "(" + std::to_string(rows_) + "x" + std::to_string(cols_) + ")";
    }

    bool operator==(const ComplexMatrix&) const = default;

    ComplexMatrix& operator+=(const ComplexMatrix& other)
    {
        require_same_shape(other, "add");
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
        return *this;
    }

    ComplexMatrix& operator-=(const ComplexMatrix& other)
    {
        require_same_shape(other, "subtract");
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
        return *this;
    }

    ComplexMatrix& operator*=(complex s) noexcept
    {
        for (auto& v : data_) v *= s;
        return *this;
    }

    void require_same_shape(const ComplexMatrix& other, const char* op) const
    {
        if (rows_ != other.rows_ || cols_ != other.cols_) {
            throw UsageError(std::string(op) + ": shape mismatch " + shape() + " vs " +
                             other.shape());
        }
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<complex> data_;
};

namespace detail {

using RowMajorMap =
    Eigen::Map<Eigen::Matrix<complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using ConstRowMajorMap =
    Eigen::Map<const Eigen::Matrix<complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

inline ConstRowMajorMap view(const ComplexMatrix& m)
{
    return {m.storage().data(), static_cast<Eigen::Index>(m.rows()),
            static_cast<Eigen::Index>(m.cols())};
}

inline RowMajorMap view(ComplexMatrix& m)
{
    return {m.storage().data(), static_cast<Eigen::Index>(m.rows()),
            static_cast<Eigen::Index>(m.cols())};
}

} // namespace detail

inline ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b)
{
    a += b;
    return a;
}

inline ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b)
{
    a -= b;
    return a;
}

inline ComplexMatrix operator*(complex s, ComplexMatrix a)
{
    a *= s;
    return a;
}

inline ComplexMatrix add(const ComplexMatrix& a, const ComplexMatrix& b) { return a + b; }
inline ComplexMatrix scale(const ComplexMatrix& a, complex s) { return s * a; }

// GEMM is delegated to Eigen; the storage stays ours.
inline ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b)
{
    if (a.cols() != b.rows()) {
        throw UsageError("matmul: inner dimensions differ " + a.shape() + " * " + b.shape());
    }
    ComplexMatrix out(a.rows(), b.cols());
    if (out.size() == 0) return out;
    if (a.cols() == 0) return out;
    detail::view(out).noalias() = detail::view(a) * detail::view(b);
    return out;
}

inline ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b)
{
    return matmul(a, b);
}

inline ComplexMatrix dagger(const ComplexMatrix& a)
{
    ComplexMatrix out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = std::conj(a(i, j));
    return out;
}

inline complex trace(const ComplexMatrix& a)
{
    if (!a.is_square()) throw UsageError("trace: matrix is not square " + a.shape());
    complex t{0.0, 0.0};
    for (std::size_t i = 0; i < a.rows(); ++i) t += a(i, i);
    return t;
}

inline double frobenius_norm(const ComplexMatrix& a)
{
    double s = 0.0;
    for (const auto& v : a.values()) s += std::norm(v);
    return std::sqrt(s);
}

/// Block (i,j) of the result is a(i,j) * b.
inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b)
{
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const complex aij = a(i, j);
            if (aij == complex{0.0, 0.0}) continue;
            for (std::size_t k = 0; k < b.rows(); ++k)
                for (std::size_t l = 0; l < b.cols(); ++l)
                    out(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
        }
    }
    return out;
}

inline ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b)
{
    return matmul(a, b) - matmul(b, a);
}

/// Frobenius norm of (a - a^dagger).
inline double hermiticity_error(const ComplexMatrix& a)
{
    if (!a.is_square()) throw UsageError("hermiticity_error: not square " + a.shape());
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) s += std::norm(a(i, j) - std::conj(a(j, i)));
    return std::sqrt(s);
}

inline double max_abs_difference(const ComplexMatrix& a, const ComplexMatrix& b)
{
    a.require_same_shape(b, "max_abs_difference");
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
        m = std::max(m, std::abs(a.storage()[k] - b.storage()[k]));
    return m;
}

} // namespace ptb
