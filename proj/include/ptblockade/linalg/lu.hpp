#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ptblockade/linalg/matrix.hpp"

namespace ptb {

class SingularMatrix : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Gaussian elimination with partial pivoting for small dense systems.
inline std::vector<complex> lu_solve(ComplexMatrix a, std::vector<complex> b)
{
    const std::size_t n = a.rows();
    if (!a.is_square() || b.size() != n) {
        throw UsageError("lu_solve: shape mismatch " + a.shape() + " with rhs of length " +
                         std::to_string(b.size()));
    }
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
        if (a(piv, k) == complex{0.0, 0.0}) {
            throw SingularMatrix("lu_solve: zero pivot in column " + std::to_string(k));
        }
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
            std::swap(b[k], b[piv]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const complex f = a(i, k) / a(k, k);
            if (f == complex{0.0, 0.0}) continue;
            for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
            b[i] -= f * b[k];
        }
    }
    std::vector<complex> x(n);
    for (std::size_t i = n; i-- > 0;) {
        complex s = b[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= a(i, j) * x[j];
        x[i] = s / a(i, i);
    }
    return x;
}

} // namespace ptb
