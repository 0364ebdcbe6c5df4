#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "ptblockade/linalg/matrix.hpp"
#include "ptblockade/model/params.hpp"

namespace ptb {

enum class PhaseClass { Broken, ExceptionalPoint, Unbroken };

inline const char* to_string(PhaseClass c)
{
    switch (c) {
    case PhaseClass::Broken: return "broken";
    case PhaseClass::ExceptionalPoint: return "exceptional_point";
    case PhaseClass::Unbroken: return "unbroken";
    }
    return "?";
}

/// -1 broken, 0 exceptional point, +1 unbroken.
inline int phase_code(PhaseClass c)
{
    return c == PhaseClass::Broken ? -1 : (c == PhaseClass::Unbroken ? 1 : 0);
}

struct PTPhase {
    PhaseClass classification = PhaseClass::Broken;
    std::array<complex, 2> eigenvalues{}; // mean + splitting, mean - splitting
    complex splitting{};                  // sqrt(J^2 - (kappa1/2)^2) in the balanced case
};

enum class Subspace { linear, single_excitation };

/// Eigenvalues of the 2x2 single-excitation block
///   [[D1 - i k1/2 - s G, J], [J, D2 + i k2/2]],  s = 0 (linear) or 1 (single_excitation).
/// In the balanced case (D2 = D1, k2 = k1) the closed forms D1 - s G/2 +- sqrt(J^2 - k1^2/4)
/// are returned; the single-excitation one drops the O(G^2) correction inside the root.
/// Otherwise the block is solved exactly.
inline PTPhase pt_eigenvalues(const SystemParams& p, Subspace subspace, double ep_tol = 1e-12)
{
    p.validate();
    const bool single = subspace == Subspace::single_excitation;
    const double kerr = single ? p.kerr_shift() : 0.0;
    const bool balanced = p.delta2 == p.delta1 && p.kappa2 == p.kappa1;
    const double imag_tol = 1e-12 * p.kappa1;

    PTPhase out;
    complex mean;
    if (balanced) {
        mean = p.delta1 - kerr / 2.0;
        out.splitting = std::sqrt(complex{p.J * p.J - p.kappa1 * p.kappa1 / 4.0, 0.0});
    } else {
        const complex h11{p.delta1 - kerr, -p.kappa1 / 2.0};
        const complex h22{p.delta2, p.kappa2 / 2.0};
        mean = (h11 + h22) / 2.0;
        const complex half = (h11 - h22) / 2.0;
        out.splitting = std::sqrt(half * half + p.J * p.J);
    }
    out.eigenvalues = {mean + out.splitting, mean - out.splitting};

    const bool at_ep = balanced ? std::abs(p.J - p.kappa1 / 2.0) < ep_tol * p.kappa1
                                : std::abs(out.splitting) < ep_tol * p.kappa1;
    if (at_ep) {
        out.classification = PhaseClass::ExceptionalPoint;
    } else if (std::abs(out.eigenvalues[0].imag()) < imag_tol &&
               std::abs(out.eigenvalues[1].imag()) < imag_tol) {
        out.classification = PhaseClass::Unbroken;
    } else {
        out.classification = PhaseClass::Broken;
    }
    return out;
}

/// Detunings where a single-excitation eigenvalue is resonant with the vacuum,
/// D1 = G/2 -+ sqrt(J^2 - k1^2/4). Empty unless the linear phase is unbroken.
inline std::vector<double> cpb_dip_locations(const SystemParams& p)
{
    if (pt_eigenvalues(p, Subspace::linear).classification != PhaseClass::Unbroken) return {};
    const double s = std::sqrt(p.J * p.J - p.kappa1 * p.kappa1 / 4.0);
    const double c = p.kerr_shift() / 2.0;
    return {c - s, c + s};
}

struct BlockadeConditionCandidate {
    double delta1 = 0.0;
    double first_relation_lhs = 0.0;  // 12 D1^2 - 4 D1 g^2 / wm
    double first_relation_rhs = 0.0;  // kappa1^2
    double second_relation = 0.0;     // 4 D1 (g^2 - 4 D1 wm)^2
    bool first_satisfied = false;
    bool second_satisfied = false;
};

struct BlockadeConditionReport {
    bool in_scope = true;
    bool jointly_soluble = false;
    std::vector<BlockadeConditionCandidate> candidates;
    std::string message;
};

/// Checks the two conditions for C20 = 0 with two lossy cavities at the roots of
/// the second one (D1 = 0 and D1 = g^2 / (4 wm)).
inline BlockadeConditionReport passive_blockade_condition_check(const SystemParams& p,
                                                                double tol = 1e-12)
{
    BlockadeConditionReport rep;
    if (!(p.kappa1 > 0.0)) {
        rep.in_scope = false;
        rep.message = "kappa1 <= 0: the passive cavity must decay; outside model scope";
        return rep;
    }
    if (!(p.omega_m > 0.0)) throw InvalidParameters("passive_blockade_condition_check: omega_m <= 0");
    const double g2 = p.g * p.g, wm = p.omega_m, k2 = p.kappa1 * p.kappa1;
    for (const double d : {0.0, g2 / (4.0 * wm)}) {
        BlockadeConditionCandidate c;
        c.delta1 = d;
        c.first_relation_lhs = 12.0 * d * d - 4.0 * d * g2 / wm;
        c.first_relation_rhs = k2;
        const double r = g2 - 4.0 * d * wm;
        c.second_relation = 4.0 * d * r * r;
        c.first_satisfied = std::abs(c.first_relation_lhs - k2) <= tol * std::max(1.0, k2);
        c.second_satisfied = std::abs(c.second_relation) <= tol * std::max(1.0, g2 * g2);
        rep.jointly_soluble = rep.jointly_soluble || (c.first_satisfied && c.second_satisfied);
        rep.candidates.push_back(c);
    }
    rep.message = rep.jointly_soluble
                      ? "both relations hold at a candidate root"
                      : "no candidate root of the second relation satisfies the first: "
                        "perfect blockade of cavity 1 is impossible";
    return rep;
}

} // namespace ptb
