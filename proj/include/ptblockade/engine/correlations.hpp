#pragma once

#include <optional>

#include "ptblockade/engine/density.hpp"
#include "ptblockade/model/operators.hpp"
#include "ptblockade/model/records.hpp"

namespace ptb {

/// Occupations below this are treated as empty and the quotients as undefined.
inline constexpr double occupation_floor = 1e-12;

/// Normally ordered moments needed for the equal-time correlations.
struct MomentOperators {
    ComplexMatrix n1, n2, nm;
    ComplexMatrix n1_pair; // a1' a1' a1 a1
    ComplexMatrix n2_pair; // a2' a2' a2 a2
    ComplexMatrix cross;   // a1' a2' a2 a1

    explicit MomentOperators(const OperatorSet& ops)
    {
        const ComplexMatrix a1d = dagger(ops.a1), a2d = dagger(ops.a2);
        n1 = a1d * ops.a1;
        n2 = a2d * ops.a2;
        nm = dagger(ops.b) * ops.b;
        n1_pair = a1d * a1d * ops.a1 * ops.a1;
        n2_pair = a2d * a2d * ops.a2 * ops.a2;
        cross = a1d * a2d * ops.a2 * ops.a1;
    }
};

/// g1, g2, g12 as normalized expectation values. Values are not clipped at zero: a
/// state from the signed-gain generator need not be positive.
inline CorrelationRecord correlations(const DensityMatrix& rho, const MomentOperators& m)
{
    CorrelationRecord r;
    const double tr = rho.trace().real();
    const double norm = tr != 0.0 ? 1.0 / tr : 1.0;
    r.n1 = expectation(m.n1, rho.matrix).real() * norm;
    r.n2 = expectation(m.n2, rho.matrix).real() * norm;
    r.nm = expectation(m.nm, rho.matrix).real() * norm;
    const bool has1 = r.n1 > occupation_floor, has2 = r.n2 > occupation_floor;
    if (has1) r.g1 = expectation(m.n1_pair, rho.matrix).real() * norm / (r.n1 * r.n1);
    if (has2) r.g2 = expectation(m.n2_pair, rho.matrix).real() * norm / (r.n2 * r.n2);
    if (has1 && has2) r.g12 = expectation(m.cross, rho.matrix).real() * norm / (r.n1 * r.n2);
    return r;
}

inline CorrelationRecord correlations(const DensityMatrix& rho, const OperatorSet& ops)
{
    return correlations(rho, MomentOperators(ops));
}

} // namespace ptb
