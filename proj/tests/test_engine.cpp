#include <gtest/gtest.h>

#include <cmath>

#include "ptblockade/analytic/amplitudes.hpp"
#include "ptblockade/engine/certify.hpp"
#include "ptblockade/engine/correlations.hpp"
#include "ptblockade/engine/delayed.hpp"
#include "ptblockade/engine/density.hpp"
#include "ptblockade/engine/evolve.hpp"
#include "ptblockade/engine/steady_state.hpp"

using namespace ptb;

namespace {

// Two cavities, both lossy, mechanics decoupled: every mode relaxes to a coherent
// state whose amplitudes solve the linear equations, so g = 1 and n = |alpha|^2.
SystemParams linear_passive()
{
    SystemParams p = SystemParams::reference();
    p.g = 0.0;
    p.kappa2 = -1.0;
    p.delta1 = 0.3;
    p.delta2 = -0.2;
    p.J = 0.6;
    return p;
}

std::pair<complex, complex> coherent_amplitudes(const SystemParams& p)
{
    // (D1 - i k1/2) a1 + J a2 = -E,  J a1 + (D2 - i |k2|/2) a2 = 0
    const complex w1{p.delta1, -p.kappa1 / 2.0}, w2{p.delta2, -std::abs(p.kappa2) / 2.0};
    const complex det = w1 * w2 - p.J * p.J;
    return {-p.E * w2 / det, p.E * p.J / det};
}

} // namespace

TEST(Density, FockStatesAndDiagnostics)
{
    const TruncationSpec t{2, 3, 2};
    const DensityMatrix rho = DensityMatrix::fock(t, 1, 2, 1);
    EXPECT_EQ(rho.trace(), complex(1.0, 0.0));
    EXPECT_EQ(rho.matrix((1 * 4 + 2) * 3 + 1, (1 * 4 + 2) * 3 + 1), complex(1.0, 0.0));
    EXPECT_THROW(DensityMatrix::fock(t, 3, 0, 0), InvalidParameters);
    EXPECT_EQ(gershgorin_min_eig_bound(DensityMatrix::vacuum(t).matrix), 0.0);

    DensityMatrix m{ComplexMatrix{{0.5, complex{0.1, 0.2}}, {complex{0.3, 0.0}, 0.5}}, t};
    const double removed = m.symmetrize();
    EXPECT_LT(hermiticity_error(m.matrix), 1e-16);
    // anti-Hermitian part has off-diagonals +-(-0.1 + 0.1i): norm sqrt(2 * 0.02)
    EXPECT_NEAR(removed, 0.2, 1e-15);
    EXPECT_NEAR(gershgorin_min_eig_bound(m.matrix), 0.5 - std::abs(complex{0.2, 0.1}), 1e-15);
}

TEST(Evolve, SinglePhotonDecaysExponentially)
{
    const TruncationSpec t{2, 2, 2};
    const OperatorSet ops = build_operator_set(t);
    const Liouvillian l(ComplexMatrix(t.dimension(), t.dimension()), {{"a1", ops.a1, 0.8}});
    const MomentOperators m(ops);
    Evolver ev(l, EvolveOptions{1e-10, 1e-13});
    DensityMatrix rho = DensityMatrix::fock(t, 1, 0, 0);
    double now = 0.0;
    for (double stop : {0.5, 1.0, 3.0}) {
        ev.advance(rho, now, stop);
        EXPECT_NEAR(expectation(m.n1, rho.matrix).real(), std::exp(-0.8 * stop), 1e-9);
        EXPECT_NEAR(rho.trace().real(), 1.0, 1e-10);
    }
    EXPECT_LT(ev.log().max_trace_drift, 1e-10);
}

TEST(Evolve, DrivenCavityFollowsTheLinearResponse)
{
    SystemParams p = linear_passive();
    p.J = 0.0;
    const TruncationSpec t{3, 2, 2};
    const OperatorSet ops = build_operator_set(t);
    const Liouvillian l = make_liouvillian(p, ops);
    // <a1>(t) = alpha (1 - exp(-(i D1 + k1/2) t)) from vacuum
    const complex alpha = -p.E / complex{p.delta1, -p.kappa1 / 2.0};
    for (double time : {0.7, 2.0, 6.0}) {
        const DensityMatrix rho = evolve(DensityMatrix::vacuum(t), l, time, EvolveOptions{1e-10, 1e-14});
        const complex want = alpha * (1.0 - std::exp(-complex{p.kappa1 / 2.0, p.delta1} * time));
        EXPECT_LT(std::abs(expectation(ops.a1, rho.matrix) - want), 1e-8 * std::abs(alpha));
    }
}

TEST(Evolve, RunawayGrowthIsReported)
{
    const TruncationSpec t{2, 2, 2};
    const OperatorSet ops = build_operator_set(t);
    // negative-rate loss is pure gain on the populations
    const Liouvillian l(ComplexMatrix(t.dimension(), t.dimension()), {{"a1", ops.a1, -2.0}});
    EvolveOptions opt;
    opt.growth_cap = 10.0;
    try {
        evolve(DensityMatrix::fock(t, 2, 0, 0), l, 20.0, opt);
        FAIL() << "expected EvolutionFailure";
    } catch (const EvolutionFailure& e) {
        EXPECT_GT(e.time_reached, 0.0);
        EXPECT_LT(e.time_reached, 20.0);
    }
    EXPECT_THROW(evolve(DensityMatrix::vacuum(t), l, -1.0), InvalidParameters);
}

TEST(SteadyState, CoherentStatesOfTheLinearPassiveSystem)
{
    SystemParams p = linear_passive();
    p.gamma_m = 0.05; // lets the integrator relax the mechanics within t_max
    const TruncationSpec t{3, 3, 2};
    const auto [a1, a2] = coherent_amplitudes(p);
    // thermal state cut at nm_max = 2: weights q^k, q = n / (n + 1)
    const double q = p.n_th / (p.n_th + 1.0);
    const double nm_truncated = (q + 2.0 * q * q) / (1.0 + q + q * q);
    for (auto method : {SteadyStateMethod::direct, SteadyStateMethod::integrate}) {
        SteadyStateOptions opt;
        opt.method = method;
        opt.residual_tol = 1e-9;
        const SteadyStateResult ss = steady_state(p, t, opt);
        ASSERT_TRUE(ss.converged) << ss.message;
        EXPECT_LT(ss.residual, 1e-9);
        EXPECT_NEAR(ss.rho.trace().real(), 1.0, 1e-12);
        const CorrelationRecord r = correlations(ss.rho, build_operator_set(t));
        EXPECT_NEAR(r.n1 / std::norm(a1), 1.0, 1e-6);
        EXPECT_NEAR(r.n2 / std::norm(a2), 1.0, 1e-6);
        EXPECT_NEAR(*r.g1, 1.0, 1e-4);
        EXPECT_NEAR(*r.g2, 1.0, 1e-4);
        EXPECT_NEAR(*r.g12, 1.0, 1e-4);
        EXPECT_NEAR(r.nm, nm_truncated, 1e-7); // residual_tol / gamma_m
    }
}

TEST(SteadyState, WeakDriveMatchesTheAmplitudeFixedPoint)
{
    // Lossy cavities with the optomechanical shift: the leading-order amplitudes
    // describe the driven state up to O(E^2) corrections.
    SystemParams p = SystemParams::reference();
    p.kappa2 = -1.0;
    p.n_th = 0.0;
    p.E = {1e-3, 0.0};
    p.delta1 = p.delta2 = -0.3;
    const TruncationSpec t{3, 3, 4};
    const SteadyStateResult ss = steady_state(p, t);
    ASSERT_TRUE(ss.converged);
    const CorrelationRecord num = correlations(ss.rho, build_operator_set(t));
    const AmplitudeSet a = amplitude_fixed_point(p, true);
    EXPECT_NEAR(num.n1 / std::norm(a.c10), 1.0, 0.05);
    EXPECT_NEAR(num.n2 / std::norm(a.c01), 1.0, 0.05);
}

TEST(Correlations, NoOccupationLeavesRatiosUndefined)
{
    const TruncationSpec t{2, 2, 2};
    const CorrelationRecord r = correlations(DensityMatrix::vacuum(t), build_operator_set(t));
    EXPECT_EQ(r.n1, 0.0);
    EXPECT_FALSE(r.g1.has_value());
    EXPECT_FALSE(r.g12.has_value());
    // |2,0,0>: <a'a'aa> = 2, n = 2
    const CorrelationRecord f = correlations(DensityMatrix::fock(t, 2, 0, 0), build_operator_set(t));
    EXPECT_NEAR(*f.g1, 0.5, 1e-15);
}

TEST(Delayed, ZeroDelayEqualsEqualTimeAndLongDelayDecorrelates)
{
    SystemParams p = SystemParams::reference();
    p.kappa2 = -1.0;
    p.delta1 = p.delta2 = 0.1;
    const TruncationSpec t{3, 3, 3};
    const OperatorSet ops = build_operator_set(t);
    const Liouvillian l = make_liouvillian(p, ops);
    const SteadyStateResult ss = steady_state(l, t);
    ASSERT_TRUE(ss.converged);
    const CorrelationRecord r = correlations(ss.rho, ops);
    const auto c1 = delayed_g2(l, ops, ss, DelayedMode::cavity1, {0.0, 40.0});
    EXPECT_NEAR(c1[0].second, *r.g1, 1e-10 * *r.g1);
    EXPECT_NEAR(c1[1].second, 1.0, 1e-3);
    const auto c2 = delayed_g2(l, ops, ss, DelayedMode::cavity2, {0.0});
    EXPECT_NEAR(c2[0].second, *r.g2, 1e-10 * *r.g2);
    const auto cx = delayed_g2(l, ops, ss, DelayedMode::cross, {0.0});
    EXPECT_NEAR(cx[0].second, *r.g12, 1e-10 * *r.g12);
    EXPECT_THROW(delayed_g2(l, ops, ss, DelayedMode::cavity1, {1.0, 0.5}), InvalidParameters);
    SteadyStateResult bad = ss;
    bad.converged = false;
    EXPECT_THROW(delayed_g2(l, ops, bad, DelayedMode::cavity1, {0.0}), SteadyStateFailure);
}

TEST(Certify, LinearSystemIsCertifiedAtTheBase)
{
    const SystemParams p = linear_passive();
    CertifyOptions opt;
    opt.cap = {3, 3, 3};
    const CertificationReport rep = truncation_certify_report(p, {2, 2, 2}, opt);
    EXPECT_EQ(rep.certified.to_string(), "(2,2,2)");
    EXPECT_EQ(rep.history.size(), 4u);
}

TEST(Certify, CapReachedWhileMovingThrows)
{
    SystemParams p = SystemParams::reference();
    p.J = 0.7;
    p.delta1 = p.delta2 = 0.5349;
    CertifyOptions opt;
    opt.cap = {3, 3, 3};
    try {
        truncation_certify_report(p, {2, 2, 2}, opt);
        FAIL() << "expected CertificationFailure";
    } catch (const CertificationFailure& e) {
        EXPECT_FALSE(e.mode.empty());
    }
}
