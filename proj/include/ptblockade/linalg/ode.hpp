#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

namespace ptb {

using OdeState = std::vector<std::complex<double>>;

/// dydt = f(t, y); the callee writes into a preallocated dydt of the same size.
using Derivative = std::function<void(double t, const OdeState& y, OdeState& dydt)>;

/// Called after every accepted step. May modify y (e.g. re-symmetrize a density
/// matrix); must return true if it did so.
using StepObserver = std::function<bool(double t, OdeState& y)>;

class IntegratorFailure : public std::runtime_error {
public:
    IntegratorFailure(const std::string& what, double t_reached)
        : std::runtime_error(what), time_reached(t_reached)
    {
    }
    double time_reached;
};

struct OdeOptions {
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double initial_step = 0.0; // 0 selects a step from the initial derivative
    double max_step = std::numeric_limits<double>::infinity();
    std::size_t max_steps = 50'000'000;
    bool fixed_step = false;   // debugging fallback: no error control
    double fixed_step_size = 1e-3;
};

struct OdeStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t evaluations = 0;
};

/// Dormand-Prince 5(4) with FSAL and a PI step-size controller.
///
/// Error norm: RMS over components of e_i / (abs_tol + rel_tol * max(|y_i|, |y_new_i|)).
/// A step is accepted when the norm is <= 1. After an accepted step the new size is
/// h * clamp(0.9 * err^-0.17 * err_prev^0.04, 0.2, 5); after a rejection it is
/// h * max(0.2, 0.9 * err^-0.2) and growth is suppressed for the next step.
/// Underflow (h below 1e-14 * max(1, |t|)) raises IntegratorFailure carrying t.
class DormandPrince {
public:
    DormandPrince(Derivative f, OdeOptions options) : f_(std::move(f)), opt_(options)
    {
        if (!(opt_.rel_tol > 0.0) || !(opt_.abs_tol > 0.0)) {
            throw std::invalid_argument("DormandPrince: tolerances must be positive");
        }
    }

    const OdeStats& stats() const noexcept { return stats_; }
    double last_step() const noexcept { return h_; }

    /// Advance y from t to t_end (t_end >= t). On return t == t_end.
    void advance(OdeState& y, double& t, double t_end, const StepObserver& observer = {})
    {
        if (t_end < t) throw std::invalid_argument("DormandPrince::advance: t_end < t");
        if (t_end == t) return;
        ensure_workspace(y.size());
        if (!fsal_valid_) {
            eval(t, y, k1_);
            fsal_valid_ = true;
        }
        if (opt_.fixed_step) {
            advance_fixed(y, t, t_end, observer);
            return;
        }
        if (h_ <= 0.0) h_ = initial_step(y, t, t_end);

        bool last_rejected = false;
        while (t < t_end) {
            if (stats_.accepted + stats_.rejected >= opt_.max_steps) {
                fail("step budget exhausted", t, y);
            }
            const double span = t_end - t;
            double h = std::min({h_, opt_.max_step, span});
            // avoid a sliver step at the end of the interval
            if (span - h < 1e-12 * span) h = span;
            if (h < 1e-14 * std::max(1.0, std::abs(t))) fail("step size underflow", t, y);

            const double err = try_step(y, t, h);
            if (err <= 1.0) {
                ++stats_.accepted;
                t = (h == span) ? t_end : t + h;
                y.swap(ynew_);
                k1_.swap(k7_);
                if (!all_finite(y)) fail("non-finite state", t, y);
                double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.17) *
                             std::pow(err_prev_, 0.04);
                fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 5.0);
                h_ = h * fac;
                err_prev_ = std::max(err, 1e-4);
                last_rejected = false;
                if (observer && observer(t, y)) eval(t, y, k1_);
            } else {
                ++stats_.rejected;
                const double fac = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.2;
                h_ = h * fac;
                last_rejected = true;
            }
        }
    }

private:
    void fail(const char* why, double t, const OdeState& y) const
    {
        double norm = 0.0;
        for (const auto& v : y) norm += std::norm(v);
        std::ostringstream os;
        os << "ODE integration failed (" << why << ") at t=" << t << ", |y|=" << std::sqrt(norm);
        throw IntegratorFailure(os.str(), t);
    }

    static bool all_finite(const OdeState& y)
    {
        for (const auto& v : y)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
        return true;
    }

    void eval(double t, const OdeState& y, OdeState& out)
    {
        ++stats_.evaluations;
        f_(t, y, out);
    }

    void ensure_workspace(std::size_t n)
    {
        if (k1_.size() == n) return;
        for (auto* v : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &tmp_, &ynew_})
            v->assign(n, {0.0, 0.0});
        fsal_valid_ = false;
    }

    double scaled_norm(const OdeState& v, const OdeState& y) const
    {
        double s = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            const double sc = opt_.abs_tol + opt_.rel_tol * std::abs(y[i]);
            s += std::norm(v[i]) / (sc * sc);
        }
        return std::sqrt(s / static_cast<double>(std::max<std::size_t>(v.size(), 1)));
    }

    double initial_step(const OdeState& y, double t, double t_end)
    {
        if (opt_.initial_step > 0.0) return opt_.initial_step;
        const double d0 = scaled_norm(y, y);
        const double d1 = scaled_norm(k1_, y);
        double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        return std::min(h, t_end - t);
    }

    // Computes ynew_ and k7_ (= f(t+h, ynew)); returns the scaled error norm.
    double try_step(const OdeState& y, double t, double h)
    {
        const std::size_t n = y.size();
        constexpr double a21 = 1.0 / 5.0;
        constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
        constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
        constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                         a54 = -212.0 / 729.0;
        constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                         a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
        constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                         b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
        constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                         e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

        for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + h * a21 * k1_[i];
        eval(t + h / 5.0, tmp_, k2_);
        for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + h * (a31 * k1_[i] + a32 * k2_[i]);
        eval(t + 3.0 * h / 10.0, tmp_, k3_);
        for (std::size_t i = 0; i < n; ++i)
            tmp_[i] = y[i] + h * (a41 * k1_[i] + a42 * k2_[i] + a43 * k3_[i]);
        eval(t + 4.0 * h / 5.0, tmp_, k4_);
        for (std::size_t i = 0; i < n; ++i)
            tmp_[i] = y[i] + h * (a51 * k1_[i] + a52 * k2_[i] + a53 * k3_[i] + a54 * k4_[i]);
        eval(t + 8.0 * h / 9.0, tmp_, k5_);
        for (std::size_t i = 0; i < n; ++i)
            tmp_[i] = y[i] + h * (a61 * k1_[i] + a62 * k2_[i] + a63 * k3_[i] + a64 * k4_[i] +
                                  a65 * k5_[i]);
        eval(t + h, tmp_, k6_);
        for (std::size_t i = 0; i < n; ++i)
            ynew_[i] = y[i] + h * (b1 * k1_[i] + b3 * k3_[i] + b4 * k4_[i] + b5 * k5_[i] +
                                   b6 * k6_[i]);
        eval(t + h, ynew_, k7_);

        if (opt_.fixed_step) return 0.0;
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const std::complex<double> e =
                h * (e1 * k1_[i] + e3 * k3_[i] + e4 * k4_[i] + e5 * k5_[i] + e6 * k6_[i] +
                     e7 * k7_[i]);
            const double sc =
                opt_.abs_tol + opt_.rel_tol * std::max(std::abs(y[i]), std::abs(ynew_[i]));
            s += std::norm(e) / (sc * sc);
        }
        return std::sqrt(s / static_cast<double>(std::max<std::size_t>(n, 1)));
    }

    void advance_fixed(OdeState& y, double& t, double t_end, const StepObserver& observer)
    {
        while (t < t_end) {
            const double span = t_end - t;
            const double h = (span - opt_.fixed_step_size < 1e-12 * span) ? span
                                                                           : opt_.fixed_step_size;
            try_step(y, t, h);
            ++stats_.accepted;
            t = (h == span) ? t_end : t + h;
            y.swap(ynew_);
            k1_.swap(k7_);
            if (!all_finite(y)) fail("non-finite state", t, y);
            if (observer && observer(t, y)) eval(t, y, k1_);
        }
    }

    Derivative f_;
    OdeOptions opt_;
    OdeStats stats_;
    double h_ = 0.0;
    double err_prev_ = 1e-4;
    bool fsal_valid_ = false;
    OdeState k1_, k2_, k3_, k4_, k5_, k6_, k7_, tmp_, ynew_;
};

/// Integrate from t = 0 to t_end and return y(t_end).
inline OdeState ode_integrate(const Derivative& deriv, OdeState y0, double t_end, double rel_tol,
                              double abs_tol)
{
    if (t_end < 0.0) throw std::invalid_argument("ode_integrate: t_end must be >= 0");
    OdeOptions opt;
    opt.rel_tol = rel_tol;
    opt.abs_tol = abs_tol;
    DormandPrince stepper(deriv, opt);
    double t = 0.0;
    stepper.advance(y0, t, t_end);
    return y0;
}

} // namespace ptb
