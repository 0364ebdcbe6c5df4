#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ptblockade/engine/correlations.hpp"
#include "ptblockade/engine/evolve.hpp"
#include "ptblockade/engine/steady_state.hpp"

namespace ptb {

class SteadyStateFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class DelayedMode { cavity1, cavity2, cross };

inline const char* to_string(DelayedMode m)
{
    switch (m) {
    case DelayedMode::cavity1: return "cavity1";
    case DelayedMode::cavity2: return "cavity2";
    case DelayedMode::cross: return "cross";
    }
    return "?";
}

/// Quantum-regression delayed correlation from a converged steady state. The
/// conditional operator a_j rho a_j' (j = 1 for cross) is evolved under the same
/// generator and probed with n_j (n_2 for cross), normalized by the steady-state
/// occupations. tau_grid must be non-decreasing and start at or after zero.
inline std::vector<std::pair<double, double>>
delayed_g2(const Liouvillian& l, const OperatorSet& ops, const SteadyStateResult& ss,
           DelayedMode mode, const std::vector<double>& tau_grid, const EvolveOptions& opt = {})
{
    if (!ss.converged) throw SteadyStateFailure("delayed_g2: steady state not converged (" + ss.message + ")");
    for (std::size_t i = 0; i < tau_grid.size(); ++i) {
        if (tau_grid[i] < 0.0 || (i > 0 && tau_grid[i] < tau_grid[i - 1])) {
            throw InvalidParameters("delayed_g2: tau grid must be non-negative and non-decreasing");
        }
    }
    const MomentOperators m(ops);
    const ComplexMatrix& cond_op = mode == DelayedMode::cavity2 ? ops.a2 : ops.a1;
    const ComplexMatrix& probe = mode == DelayedMode::cavity1 ? m.n1 : m.n2;
    const double n_cond = expectation(mode == DelayedMode::cavity2 ? m.n2 : m.n1, ss.rho.matrix).real();
    const double n_probe = expectation(probe, ss.rho.matrix).real();
    if (!(n_cond > occupation_floor) || !(n_probe > occupation_floor)) {
        throw std::domain_error(std::string("delayed_g2: occupation below floor for mode ") +
                                to_string(mode));
    }

    DensityMatrix rc{cond_op * ss.rho.matrix * dagger(cond_op), ss.rho.dims};
    Evolver ev(l, opt);
    double t = 0.0;
    std::vector<std::pair<double, double>> out;
    out.reserve(tau_grid.size());
    for (const double tau : tau_grid) {
        ev.advance(rc, t, tau);
        out.emplace_back(tau, expectation(probe, rc.matrix).real() / (n_cond * n_probe));
    }
    return out;
}

inline std::vector<std::pair<double, double>> delayed_g2(const SystemParams& p,
                                                         const TruncationSpec& trunc,
                                                         DelayedMode mode,
                                                         const std::vector<double>& tau_grid)
{
    const OperatorSet ops = build_operator_set(trunc);
    const Liouvillian l = make_liouvillian(p, ops);
    return delayed_g2(l, ops, steady_state(l, trunc), mode, tau_grid);
}

} // namespace ptb
