#pragma once

#include <cmath>
#include <cstddef>

#include "ptblockade/linalg/matrix.hpp"
#include "ptblockade/model/params.hpp"

namespace ptb {

/// Truncated boson annihilator: entry (n-1, n) = sqrt(n).
inline ComplexMatrix build_annihilation(std::size_t n_max)
{
    if (n_max < 1) throw InvalidParameters("build_annihilation: n_max must be >= 1");
    ComplexMatrix a(n_max + 1, n_max + 1);
    for (std::size_t n = 1; n <= n_max; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

/// Mode operators embedded in cavity1 (x) cavity2 (x) mechanics. The basis index of
/// |n1, n2, nm> is (n1 * (n2_max+1) + n2) * (nm_max+1) + nm.
struct OperatorSet {
    ComplexMatrix a1;
    ComplexMatrix a2;
    ComplexMatrix b;
    ComplexMatrix identity;
    TruncationSpec dims;

    std::size_t dimension() const { return identity.rows(); }

    std::size_t index(std::size_t n1, std::size_t n2, std::size_t nm) const
    {
        return (n1 * (dims.n2_max + 1) + n2) * (dims.nm_max + 1) + nm;
    }
};

inline OperatorSet build_operator_set(const TruncationSpec& trunc)
{
    trunc.validate();
    const auto i1 = ComplexMatrix::identity(trunc.n1_max + 1);
    const auto i2 = ComplexMatrix::identity(trunc.n2_max + 1);
    const auto im = ComplexMatrix::identity(trunc.nm_max + 1);
    OperatorSet ops;
    ops.a1 = kron(kron(build_annihilation(trunc.n1_max), i2), im);
    ops.a2 = kron(kron(i1, build_annihilation(trunc.n2_max)), im);
    ops.b = kron(kron(i1, i2), build_annihilation(trunc.nm_max));
    ops.identity = ComplexMatrix::identity(trunc.dimension());
    ops.dims = trunc;
    return ops;
}

} // namespace ptb
