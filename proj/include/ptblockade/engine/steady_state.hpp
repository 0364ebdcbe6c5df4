#pragma once

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "ptblockade/engine/density.hpp"
#include "ptblockade/engine/evolve.hpp"
#include "ptblockade/linalg/gmres.hpp"
#include "ptblockade/linalg/sylvester.hpp"
#include "ptblockade/model/liouvillian.hpp"
#include "ptblockade/model/operators.hpp"

namespace ptb {

enum class SteadyStateMethod {
    direct,    ///< solve L(rho) = 0 with tr(rho) = 1 (default)
    integrate, ///< evolve from vacuum until the residual drops below tolerance
};

struct SteadyStateOptions {
    double residual_tol = 1e-7;  // on ||L(rho)||_F / ||rho||_F
    double t_max = 2000.0;       // integrate only, units of 1/kappa1
    double check_interval = 5.0; // integrate only: residual is tested this often
    SteadyStateMethod method = SteadyStateMethod::direct;
    GmresOptions gmres{1e-12, 60, 600};
    EvolveOptions evolve{};
};

struct SteadyStateResult {
    DensityMatrix rho;
    bool converged = false;
    double t_reached = 0.0;
    double residual = std::numeric_limits<double>::quiet_NaN();
    double min_eig_bound = std::numeric_limits<double>::quiet_NaN();
    std::size_t iterations = 0; // GMRES iterations or accepted integrator steps
    /// Largest real part of the spectrum of rho -> A rho + rho A', A the jump-free
    /// generator; positive values mean the no-jump evolution amplifies (direct only).
    double max_growth_rate = std::numeric_limits<double>::quiet_NaN();
    std::string message;
};

inline double relative_residual(const Liouvillian& l, const ComplexMatrix& rho)
{
    const double n = frobenius_norm(rho);
    return n > 0.0 ? frobenius_norm(l(rho)) / n : std::numeric_limits<double>::infinity();
}

namespace detail {

inline SteadyStateResult steady_state_direct(const Liouvillian& l, const TruncationSpec& dims,
                                             const SteadyStateOptions& opt)
{
    const std::size_t d = l.dimension();
    const LyapunovSolver pre(l.effective_generator());

    // Trace-bordered system L(X) + P tr(X) = P with P the vacuum projector: any
    // solution has tr(X) = 1 and L(X) = 0.
    ComplexMatrix y(d, d), x(d, d), lx(d, d);
    auto precondition = [&](const KrylovVector& in, KrylovVector& out) {
        std::copy(in.begin(), in.end(), y.storage().begin());
        out = std::move(pre.solve(y).storage());
    };
    auto apply = [&](const KrylovVector& in, KrylovVector& out) {
        std::copy(in.begin(), in.end(), x.storage().begin());
        l.apply(x, lx);
        lx(0, 0) += trace(x);
        out = lx.storage();
    };
    KrylovVector b(d * d, complex{0.0, 0.0});
    b[0] = 1.0;
    const GmresResult g = gmres(apply, precondition, b, {}, opt.gmres);

    SteadyStateResult res;
    res.rho = DensityMatrix{ComplexMatrix(d, d), dims};
    res.rho.matrix.storage() = g.x;
    const complex tr = res.rho.trace();
    if (std::abs(tr) > 0.0) res.rho.matrix *= 1.0 / tr;
    res.rho.symmetrize();
    res.iterations = g.iterations;
    res.residual = relative_residual(l, res.rho.matrix);
    res.converged = g.converged && res.residual < opt.residual_tol;
    res.max_growth_rate = pre.max_growth_rate();
    std::ostringstream os;
    os << "direct: " << g.iterations << " GMRES iterations, bordered residual "
       << g.relative_residual << ", ||L(rho)||/||rho|| = " << res.residual;
    res.message = os.str();
    return res;
}

inline SteadyStateResult steady_state_integrate(const Liouvillian& l, const TruncationSpec& dims,
                                                const SteadyStateOptions& opt)
{
    SteadyStateResult res;
    res.rho = DensityMatrix::vacuum(dims);
    res.residual = relative_residual(l, res.rho.matrix);
    if (res.residual < opt.residual_tol) {
        res.converged = true;
        res.message = "integrate: initial state is stationary";
        return res;
    }
    Evolver ev(l, opt.evolve);
    double t = 0.0;
    try {
        while (t < opt.t_max) {
            ev.advance(res.rho, t, std::min(opt.t_max, t + opt.check_interval));
            res.residual = relative_residual(l, res.rho.matrix);
            if (res.residual < opt.residual_tol) {
                res.converged = true;
                break;
            }
        }
        std::ostringstream os;
        os << "integrate: t=" << t << ", ||L(rho)||/||rho|| = " << res.residual;
        res.message = os.str();
    } catch (const EvolutionFailure& e) {
        t = e.time_reached;
        res.message = e.what();
    }
    res.t_reached = t;
    res.iterations = ev.log().accepted_steps;
    const complex tr = res.rho.trace();
    if (std::abs(tr) > 0.0 && std::isfinite(std::abs(tr))) res.rho.matrix *= 1.0 / tr;
    return res;
}

} // namespace detail

/// Stationary state of a prebuilt generator. Never throws on non-convergence; the
/// result carries converged = false and the diagnostics.
inline SteadyStateResult steady_state(const Liouvillian& l, const TruncationSpec& dims,
                                      const SteadyStateOptions& opt = {})
{
    if (!(opt.residual_tol > 0.0)) throw InvalidParameters("steady_state: residual_tol must be > 0");
    SteadyStateResult res = opt.method == SteadyStateMethod::direct
                                ? detail::steady_state_direct(l, dims, opt)
                                : detail::steady_state_integrate(l, dims, opt);
    res.min_eig_bound = gershgorin_min_eig_bound(res.rho.matrix);
    return res;
}

inline SteadyStateResult steady_state(const SystemParams& p, const TruncationSpec& trunc,
                                      const SteadyStateOptions& opt = {})
{
    const OperatorSet ops = build_operator_set(trunc);
    return steady_state(make_liouvillian(p, ops), trunc, opt);
}

} // namespace ptb
