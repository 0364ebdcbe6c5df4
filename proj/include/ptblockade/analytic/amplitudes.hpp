#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ptblockade/linalg/lu.hpp"
#include "ptblockade/linalg/matrix.hpp"
#include "ptblockade/linalg/ode.hpp"
#include "ptblockade/model/params.hpp"

namespace ptb {

class SingularParameters : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class NonConvergence : public std::runtime_error {
public:
    NonConvergence(const std::string& what, double drift_)
        : std::runtime_error(what), drift(drift_)
    {
    }
    double drift; // relative change over the final window, or +inf after blow-up
};

/// Probability amplitudes of the two-photon ansatz with C00 = 1.
struct AmplitudeSet {
    complex c10{};
    complex c01{};
    complex c20{};
    complex c11{};
    complex c02{};

    std::array<complex, 5> as_array() const { return {c10, c01, c20, c11, c02}; }

    static AmplitudeSet from_array(const std::array<complex, 5>& v)
    {
        return {v[0], v[1], v[2], v[3], v[4]};
    }

    /// |two-photon| < |one-photon| < 0.1, the weak-drive ordering.
    bool weak_drive_hierarchy() const
    {
        const double one = std::max(std::abs(c10), std::abs(c01));
        const double two = std::max({std::abs(c20), std::abs(c11), std::abs(c02)});
        return two < one && one < 0.1;
    }
};

namespace detail {

inline void require_close(double a, double b, const char* what, const char* op)
{
    if (std::abs(a - b) > 1e-12 * std::max({1.0, std::abs(a), std::abs(b)})) {
        throw InvalidParameters(std::string(op) + ": requires " + what);
    }
}

inline void require_nonsingular(complex v, const char* factor, const char* op)
{
    if (!(std::abs(v) >= 1e-30)) {
        std::ostringstream os;
        os << op << ": singular parameters, factor " << factor << " = " << v;
        throw SingularParameters(os.str());
    }
}

} // namespace detail

/// Closed-form steady state for the balanced case (delta2 = delta1, kappa2 = kappa1),
/// obtained with the E* C20 and E* C11 feedback terms dropped.
inline AmplitudeSet pt_amplitudes(const SystemParams& p)
{
    p.validate();
    detail::require_close(p.delta2, p.delta1, "delta2 == delta1", "pt_amplitudes");
    detail::require_close(p.kappa2, p.kappa1, "kappa2 == kappa1", "pt_amplitudes");
    const double d = p.delta1, k = p.kappa1, g = p.g, wm = p.omega_m, J = p.J;
    const complex e = p.E;
    const complex q{2.0 * d, k};
    const double g2 = g * g;
    const double lin = 4.0 * d * d + k * k - 4.0 * J * J;
    const complex f1 = 2.0 * g2 * q - wm * lin;
    const complex f2 = 4.0 * g2 * g2 * q + 2.0 * d * wm * wm * lin -
                       g2 * wm * complex{20.0 * d * d + k * k - 8.0 * J * J, 8.0 * d * k};
    detail::require_nonsingular(f1, "2g^2(2D1+i k1) - wm(4D1^2+k1^2-4J^2)", "pt_amplitudes");
    detail::require_nonsingular(f2, "4g^4(2D1+i k1) + 2D1 wm^2(...) - g^2 wm(...)", "pt_amplitudes");
    const complex m = f1 * f2;
    detail::require_nonsingular(m, "M", "pt_amplitudes");

    const double s2 = std::sqrt(2.0);
    const complex e2w2 = e * e * wm * wm;
    AmplitudeSet a;
    a.c10 = 2.0 * wm * e * q / f1;
    a.c01 = -4.0 * J * wm * e / f1;
    a.c20 = 2.0 * s2 * e2w2 * q * q * (g2 - 2.0 * d * wm) / m;
    a.c11 = 16.0 * J * e2w2 * q * (d * wm - g2) / m;
    a.c02 = 16.0 * s2 * J * J * e2w2 * (g2 - d * wm) / m;
    return a;
}

/// Closed-form steady state for two lossy cavities (kappa2 = -kappa1, delta2 = delta1).
/// C11 carries the sign that makes it the fixed point of the amplitude equations.
inline AmplitudeSet passive_amplitudes(const SystemParams& p)
{
    p.validate();
    detail::require_close(p.delta2, p.delta1, "delta2 == delta1", "passive_amplitudes");
    detail::require_close(p.kappa2, -p.kappa1, "kappa2 == -kappa1", "passive_amplitudes");
    const double d = p.delta1, k = p.kappa1, g = p.g, wm = p.omega_m, J = p.J;
    const complex e = p.E;
    const complex q{2.0 * d, -k};
    const double g2 = g * g;
    const complex f1 = 2.0 * g2 * q - wm * (q * q - 4.0 * J * J);
    const complex f2 = 4.0 * g2 * g2 * q - g2 * wm * (5.0 * q * q - 8.0 * J * J) +
                       wm * wm * q * (q * q - 4.0 * J * J);
    detail::require_nonsingular(f1, "2g^2 q - wm(q^2-4J^2), q = 2D1 - i k1", "passive_amplitudes");
    detail::require_nonsingular(f2, "4g^4 q - g^2 wm(5q^2-8J^2) + wm^2 q(q^2-4J^2)",
                                "passive_amplitudes");
    const complex m = f1 * f2;
    detail::require_nonsingular(m, "M", "passive_amplitudes");

    const double s2 = std::sqrt(2.0);
    const complex e2w2 = e * e * wm * wm;
    AmplitudeSet a;
    a.c10 = 2.0 * wm * e * q / f1;
    a.c01 = -4.0 * J * wm * e / f1;
    a.c20 = 2.0 * s2 * e2w2 * q * q * (g2 - wm * q) / m;
    a.c11 = -8.0 * J * e2w2 * q * (2.0 * g2 - wm * q) / m;
    a.c02 = 8.0 * s2 * J * J * e2w2 * (2.0 * g2 - wm * q) / m;
    return a;
}

/// C20 for independent detunings with balanced gain and loss (kappa2 = kappa1).
/// Vanishes on the line delta1 + delta2 = g^2 / omega_m.
inline complex unequal_detuning_c20(const SystemParams& p)
{
    p.validate();
    detail::require_close(p.kappa2, p.kappa1, "kappa2 == kappa1", "unequal_detuning_c20");
    const double d1 = p.delta1, d2 = p.delta2, k = p.kappa1, g = p.g, wm = p.omega_m, J = p.J;
    const double g2 = g * g;
    const complex q2{2.0 * d2, k};
    const complex q1m{2.0 * d1, -k};
    const double sum = g2 - wm * (d1 + d2);
    const complex f1 = 4.0 * J * J * wm + q2 * (2.0 * g2 - wm * q1m);
    const complex f2 = 4.0 * J * J * wm * (2.0 * g2 - wm * (d1 + d2)) +
                       q2 * sum * (4.0 * g2 - wm * q1m);
    detail::require_nonsingular(f1, "4J^2 wm + (2D2+i k)(2g^2 - wm(2D1-i k))", "unequal_detuning_c20");
    detail::require_nonsingular(f2, "4J^2 wm(2g^2-wm(D1+D2)) + ...", "unequal_detuning_c20");
    return 2.0 * std::sqrt(2.0) * wm * wm * p.E * p.E * q2 * q2 * sum / (f1 * f2);
}

enum class BlockadeTarget { cavity1, cavity2_and_cross };

/// Detuning at which C20 (cavity1) or C11 and C02 (cavity2_and_cross) vanish.
inline double optimal_detuning(BlockadeTarget target, double g, double omega_m)
{
    if (!(omega_m > 0.0)) throw InvalidParameters("optimal_detuning: omega_m must be > 0");
    const double kerr = g * g / omega_m;
    return target == BlockadeTarget::cavity1 ? kerr / 2.0 : kerr;
}

/// The five linear amplitude equations i dC/dt = M C + f with C00 = 1 pinned, for
/// arbitrary detunings and signed kappa2. Ordering (c10, c01, c20, c11, c02).
/// With retain_higher_order the E* C20 and E* C11 feedback into the one-photon rows
/// is kept.
struct AmplitudeEquations {
    ComplexMatrix m;
    std::array<complex, 5> drive{};

    AmplitudeEquations(const SystemParams& p, bool retain_higher_order) : m(5, 5)
    {
        p.validate();
        const double kerr = p.kerr_shift();
        const double s2 = std::sqrt(2.0);
        const complex w1{p.delta1, -p.kappa1 / 2.0};
        const complex w2{p.delta2, p.kappa2 / 2.0};
        m(0, 0) = w1 - kerr;
        m(0, 1) = p.J;
        m(1, 0) = p.J;
        m(1, 1) = w2;
        m(2, 0) = s2 * p.E;
        m(2, 2) = 2.0 * (w1 - 2.0 * kerr);
        m(2, 3) = s2 * p.J;
        m(3, 1) = p.E;
        m(3, 2) = s2 * p.J;
        m(3, 3) = w1 + w2 - kerr;
        m(3, 4) = s2 * p.J;
        m(4, 3) = s2 * p.J;
        m(4, 4) = 2.0 * w2;
        if (retain_higher_order) {
            m(0, 2) = s2 * std::conj(p.E);
            m(1, 3) = std::conj(p.E);
        }
        drive[0] = p.E;
    }

    /// dC/dt = -i (M C + f)
    void derivative(const OdeState& c, OdeState& dc) const
    {
        for (std::size_t i = 0; i < 5; ++i) {
            complex s = drive[i];
            for (std::size_t j = 0; j < 5; ++j) s += m(i, j) * c[j];
            dc[i] = complex{0.0, -1.0} * s;
        }
    }
};

/// Stationary point M C = -f, by dense elimination.
inline AmplitudeSet amplitude_fixed_point(const SystemParams& p, bool retain_higher_order)
{
    const AmplitudeEquations eq(p, retain_higher_order);
    std::vector<complex> rhs(5);
    for (std::size_t i = 0; i < 5; ++i) rhs[i] = -eq.drive[i];
    try {
        const auto x = lu_solve(eq.m, rhs);
        return {x[0], x[1], x[2], x[3], x[4]};
    } catch (const SingularMatrix& e) {
        throw SingularParameters(std::string("amplitude_fixed_point: ") + e.what());
    }
}

/// Integrates the amplitude equations (higher-order terms kept) from C = 0 to t_end
/// and returns the final amplitudes if the relative change over the last 10% of the
/// window is below 1e-8. Otherwise throws NonConvergence carrying that drift.
inline AmplitudeSet schrodinger_ode_amplitudes(const SystemParams& p, double t_end)
{
    if (!(t_end > 0.0)) throw InvalidParameters("schrodinger_ode_amplitudes: t_end must be > 0");
    const AmplitudeEquations eq(p, true);
    OdeOptions opt;
    opt.rel_tol = 1e-10;
    opt.abs_tol = 1e-16;
    DormandPrince stepper([&eq](double, const OdeState& y, OdeState& dy) { eq.derivative(y, dy); },
                          opt);
    OdeState c(5, complex{0.0, 0.0});
    double t = 0.0;
    try {
        stepper.advance(c, t, 0.9 * t_end);
        const OdeState mark = c;
        stepper.advance(c, t, t_end);
        double diff = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < 5; ++i) {
            diff = std::max(diff, std::abs(c[i] - mark[i]));
            scale = std::max(scale, std::abs(c[i]));
        }
        const double drift = scale > 0.0 ? diff / scale : 0.0;
        if (!(drift < 1e-8)) {
            std::ostringstream os;
            os << "schrodinger_ode_amplitudes: not settled by t=" << t_end
               << ", relative drift over the final 10% = " << drift << ", max|C| = " << scale;
            throw NonConvergence(os.str(), drift);
        }
    } catch (const IntegratorFailure& e) {
        std::ostringstream os;
        os << "schrodinger_ode_amplitudes: amplitudes diverge (" << e.what() << ")";
        throw NonConvergence(os.str(), std::numeric_limits<double>::infinity());
    }
    return {c[0], c[1], c[2], c[3], c[4]};
}

} // namespace ptb
