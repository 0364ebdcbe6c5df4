#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include "ptblockade/engine/density.hpp"
#include "ptblockade/linalg/ode.hpp"
#include "ptblockade/model/liouvillian.hpp"

namespace ptb {

class EvolutionFailure : public std::runtime_error {
public:
    EvolutionFailure(const std::string& what, double t_reached)
        : std::runtime_error(what), time_reached(t_reached)
    {
    }
    double time_reached;
};

struct EvolveOptions {
    double rel_tol = 1e-8;
    double abs_tol = 1e-12;
    /// Abort when ||rho||_F exceeds growth_cap * ||rho0||_F.
    double growth_cap = 1e12;
    bool fixed_step = false;
};

/// Per-run bookkeeping of what the step observer corrected.
struct EvolveLog {
    double max_hermiticity_fix = 0.0; // largest anti-Hermitian part removed after a step
    double max_trace_drift = 0.0;     // max |tr rho(t) - tr rho0|
    std::size_t accepted_steps = 0;
    std::size_t rejected_steps = 0;
};

/// Integrates d rho/dt = L(rho) with Dormand-Prince, in place over successive calls.
/// rho is re-symmetrized after every accepted step.
class Evolver {
public:
    Evolver(const Liouvillian& l, const EvolveOptions& opt)
        : l_(l), opt_(opt), in_(l.dimension(), l.dimension()), out_(l.dimension(), l.dimension()),
          stepper_(make_derivative(), make_ode_options(opt))
    {
    }

    Evolver(const Evolver&) = delete;
    Evolver& operator=(const Evolver&) = delete;

    const EvolveLog& log() const noexcept { return log_; }

    /// Advances rho from t to t_end.
    void advance(DensityMatrix& rho, double& t, double t_end)
    {
        rho.matrix.require_same_shape(in_, "Evolver::advance");
        if (!started_) {
            trace0_ = rho.trace();
            norm0_ = std::max(frobenius_norm(rho.matrix), 1e-300);
            started_ = true;
        }
        const std::size_t n = l_.dimension();
        OdeState y = std::move(rho.matrix.storage());
        auto observer = [&](double tt, OdeState& yy) {
            ComplexMatrix m(n, n);
            m.storage().swap(yy);
            DensityMatrix view{std::move(m), rho.dims};
            const double fix = view.symmetrize();
            log_.max_hermiticity_fix = std::max(log_.max_hermiticity_fix, fix);
            log_.max_trace_drift = std::max(log_.max_trace_drift, std::abs(view.trace() - trace0_));
            const double norm = frobenius_norm(view.matrix);
            yy.swap(view.matrix.storage());
            if (!(norm <= opt_.growth_cap * norm0_)) {
                std::ostringstream os;
                os << "evolve: runaway growth at t=" << tt << ", ||rho||_F=" << norm
                   << ", trace=" << ptb::trace_of(yy, n);
                throw EvolutionFailure(os.str(), tt);
            }
            return fix > 0.0;
        };
        try {
            stepper_.advance(y, t, t_end, observer);
        } catch (const IntegratorFailure& e) {
            std::ostringstream os;
            os << "evolve: " << e.what() << ", trace=" << ptb::trace_of(y, n);
            throw EvolutionFailure(os.str(), e.time_reached);
        }
        rho.matrix.storage() = std::move(y);
        log_.accepted_steps = stepper_.stats().accepted;
        log_.rejected_steps = stepper_.stats().rejected;
    }

private:
    Derivative make_derivative()
    {
        return [this](double, const OdeState& y, OdeState& dy) {
            std::copy(y.begin(), y.end(), in_.storage().begin());
            l_.apply(in_, out_);
            std::copy(out_.storage().begin(), out_.storage().end(), dy.begin());
        };
    }

    static OdeOptions make_ode_options(const EvolveOptions& opt)
    {
        OdeOptions o;
        o.rel_tol = opt.rel_tol;
        o.abs_tol = opt.abs_tol;
        o.fixed_step = opt.fixed_step;
        return o;
    }

    const Liouvillian& l_;
    EvolveOptions opt_;
    ComplexMatrix in_, out_;
    DormandPrince stepper_;
    EvolveLog log_;
    bool started_ = false;
    complex trace0_{};
    double norm0_ = 1.0;
};

/// rho(t) from rho0 under L.
inline DensityMatrix evolve(const DensityMatrix& rho0, const Liouvillian& l, double t,
                            const EvolveOptions& opt = {}, EvolveLog* log = nullptr)
{
    if (t < 0.0) throw InvalidParameters("evolve: t must be >= 0");
    DensityMatrix rho = rho0;
    Evolver ev(l, opt);
    double now = 0.0;
    ev.advance(rho, now, t);
    if (log) *log = ev.log();
    return rho;
}

} // namespace ptb
