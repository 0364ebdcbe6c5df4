#pragma once

#include <complex>
#include <cstddef>

#include "ptblockade/linalg/matrix.hpp"
#include "ptblockade/model/operators.hpp"
#include "ptblockade/model/params.hpp"

namespace ptb {

/// Rotating-frame Hamiltonian
///   D1 a1'a1 + D2 a2'a2 + wm b'b + J (a1'a2 + a1 a2') - g a1'a1 (b' + b) + E a1' + E* a1.
inline ComplexMatrix build_H1(const SystemParams& p, const OperatorSet& ops)
{
    p.validate();
    const ComplexMatrix a1d = dagger(ops.a1);
    const ComplexMatrix a2d = dagger(ops.a2);
    const ComplexMatrix bd = dagger(ops.b);
    const ComplexMatrix n1 = a1d * ops.a1;

    ComplexMatrix h = p.delta1 * n1;
    h += p.delta2 * (a2d * ops.a2);
    h += p.omega_m * (bd * ops.b);
    h += p.J * (a1d * ops.a2 + ops.a1 * a2d);
    h -= p.g * (n1 * (bd + ops.b));
    h += p.E * a1d;
    h += std::conj(p.E) * ops.a1;
    return h;
}

/// Two-mode model with the mechanics eliminated. Basis index n1 * (n2_max+1) + n2.
/// Hermitian: D1 n1 + D2 n2 + J (a1'a2 + a1 a2') - (g^2/wm) n1^2 + E a1' + E* a1.
/// Non-Hermitian adds -i kappa1/2 n1 + i kappa2/2 n2 (cavity 2 with gain for kappa2 > 0).
inline ComplexMatrix build_H_reduced(const SystemParams& p, std::size_t n1_max, std::size_t n2_max,
                                     bool non_hermitian)
{
    p.validate();
    const auto a1 = kron(build_annihilation(n1_max), ComplexMatrix::identity(n2_max + 1));
    const auto a2 = kron(ComplexMatrix::identity(n1_max + 1), build_annihilation(n2_max));
    const ComplexMatrix a1d = dagger(a1);
    const ComplexMatrix a2d = dagger(a2);
    const ComplexMatrix n1 = a1d * a1;
    const ComplexMatrix n2 = a2d * a2;

    complex d1 = p.delta1;
    complex d2 = p.delta2;
    if (non_hermitian) {
        d1 -= complex{0.0, p.kappa1 / 2.0};
        d2 += complex{0.0, p.kappa2 / 2.0};
    }
    ComplexMatrix h = d1 * n1;
    h += d2 * n2;
    h += p.J * (a1d * a2 + a1 * a2d);
    h -= p.kerr_shift() * (n1 * n1);
    h += p.E * a1d;
    h += std::conj(p.E) * a1;
    return h;
}

} // namespace ptb
