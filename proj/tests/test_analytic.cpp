#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <random>

#include "ptblockade/analytic/amplitudes.hpp"
#include "ptblockade/analytic/correlations.hpp"
#include "ptblockade/analytic/pt_phase.hpp"
#include "ptblockade/model/hamiltonian.hpp"

using namespace ptb;

namespace {

// Amplitude equations read off the non-Hermitian two-mode Hamiltonian: with
// psi = |00> + sum_s C_s |s>, i dC_s/dt = sum_t H_st C_t + H_s,00. Entries that
// feed a state from one with more photons (the E* terms) are kept only if asked.
struct Oracle {
    Eigen::Matrix<complex, 5, 5> m;
    Eigen::Matrix<complex, 5, 1> f;

    Oracle(const SystemParams& p, bool retain)
    {
        const ComplexMatrix h = build_H_reduced(p, 2, 2, true);
        const std::array<std::pair<int, int>, 5> states{{{1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}}};
        auto idx = [](std::pair<int, int> s) { return std::size_t(s.first * 3 + s.second); };
        for (int i = 0; i < 5; ++i) {
            f(i) = h(idx(states[i]), 0);
            for (int j = 0; j < 5; ++j) {
                const int ni = states[i].first + states[i].second, nj = states[j].first + states[j].second;
                m(i, j) = (nj > ni && !retain) ? complex{} : h(idx(states[i]), idx(states[j]));
            }
        }
    }

    std::array<complex, 5> fixed_point() const
    {
        const Eigen::Matrix<complex, 5, 1> c = m.fullPivLu().solve(-f);
        return {c(0), c(1), c(2), c(3), c(4)};
    }
};

double max_rel(const std::array<complex, 5>& a, const std::array<complex, 5>& b)
{
    double w = 0.0;
    for (std::size_t k = 0; k < 5; ++k) {
        const double s = std::max(std::abs(a[k]), std::abs(b[k]));
        if (s > 0.0) w = std::max(w, std::abs(a[k] - b[k]) / s);
    }
    return w;
}

SystemParams random_point(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> d(-1.0, 1.0), g(0.3, 5.0), wm(20.0, 200.0), J(0.05, 1.2), e(1e-4, 0.01);
    SystemParams p = SystemParams::reference();
    p.delta1 = p.delta2 = d(rng);
    p.g = g(rng);
    p.omega_m = wm(rng);
    p.J = J(rng);
    p.E = {e(rng), 0.0};
    return p;
}

} // namespace

TEST(AmplitudeEquations, MatchHamiltonianMatrixElements)
{
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        SystemParams p = random_point(rng);
        p.delta2 = p.delta1 + 0.3 * trial;
        p.kappa2 = 0.5 + 0.1 * trial;
        p.E = {0.01, 0.003};
        for (bool retain : {false, true}) {
            const AmplitudeEquations eq(p, retain);
            const Oracle o(p, retain);
            for (int i = 0; i < 5; ++i) {
                EXPECT_LT(std::abs(eq.drive[i] - o.f(i)), 1e-15);
                for (int j = 0; j < 5; ++j) EXPECT_LT(std::abs(eq.m(i, j) - o.m(i, j)), 1e-13) << i << "," << j;
            }
        }
    }
}

TEST(PtAmplitudes, ClosedFormIsTheFixedPoint)
{
    std::mt19937_64 rng(32);
    for (int trial = 0; trial < 50; ++trial) {
        const SystemParams p = random_point(rng);
        EXPECT_LT(max_rel(pt_amplitudes(p).as_array(), Oracle(p, false).fixed_point()), 1e-9);
    }
}

TEST(PtAmplitudes, DroppedTermsScaleAsDriveSquared)
{
    // The neglected E* feedback shifts the one-photon amplitudes by O(|E|^2):
    // halving E quarters the relative deviation from the full fixed point.
    std::mt19937_64 rng(33);
    auto deviation = [](const SystemParams& p) {
        const auto closed = pt_amplitudes(p), full = AmplitudeSet::from_array(Oracle(p, true).fixed_point());
        return std::abs(closed.c10 - full.c10) / std::abs(full.c10);
    };
    for (int trial = 0; trial < 20; ++trial) {
        SystemParams p = random_point(rng);
        p.E = {2e-3, 0.0};
        const double big = deviation(p);
        p.E = {1e-3, 0.0};
        const double small = deviation(p);
        EXPECT_NEAR(big / small, 4.0, 0.05);
        EXPECT_LT(small, 1e-3);
    }
}

TEST(PtAmplitudes, ZerosAtTheOptimalDetunings)
{
    std::mt19937_64 rng(34);
    for (int trial = 0; trial < 20; ++trial) {
        SystemParams p = random_point(rng);
        p.delta1 = p.delta2 = optimal_detuning(BlockadeTarget::cavity1, p.g, p.omega_m);
        const AmplitudeSet a = pt_amplitudes(p);
        EXPECT_LT(std::abs(a.c20), 1e-14 * std::abs(a.c10) * std::abs(a.c10) + 1e-300);
        p.delta1 = p.delta2 = optimal_detuning(BlockadeTarget::cavity2_and_cross, p.g, p.omega_m);
        const AmplitudeSet b = pt_amplitudes(p);
        EXPECT_LT(std::abs(b.c11), 1e-14 * std::abs(b.c10) * std::abs(b.c10) + 1e-300);
        EXPECT_LT(std::abs(b.c02), 1e-14 * std::abs(b.c10) * std::abs(b.c10) + 1e-300);
    }
    EXPECT_DOUBLE_EQ(optimal_detuning(BlockadeTarget::cavity1, 3.0, 100.0), 0.045);
    EXPECT_DOUBLE_EQ(optimal_detuning(BlockadeTarget::cavity2_and_cross, 3.0, 100.0), 0.09);
    EXPECT_THROW(optimal_detuning(BlockadeTarget::cavity1, 3.0, 0.0), InvalidParameters);
}

TEST(PtAmplitudes, PreconditionsAndSingularities)
{
    SystemParams p = SystemParams::reference();
    p.delta2 = p.delta1 + 0.1;
    EXPECT_THROW(pt_amplitudes(p), InvalidParameters);
    p = SystemParams::reference();
    p.kappa2 = 0.5;
    EXPECT_THROW(pt_amplitudes(p), InvalidParameters);
    // g = 0, D = 0 at the exceptional point: the linear response diverges
    p = SystemParams::reference();
    p.g = 0.0;
    EXPECT_THROW(pt_amplitudes(p), SingularParameters);
}

TEST(PtAmplitudes, WeakDriveHierarchyAtReference)
{
    SystemParams p = SystemParams::reference();
    p.delta1 = p.delta2 = -0.2;
    EXPECT_TRUE(pt_amplitudes(p).weak_drive_hierarchy());
}

TEST(PassiveAmplitudes, ClosedFormIsTheFixedPoint)
{
    std::mt19937_64 rng(35);
    for (int trial = 0; trial < 30; ++trial) {
        SystemParams p = random_point(rng);
        p.kappa2 = -p.kappa1;
        EXPECT_LT(max_rel(passive_amplitudes(p).as_array(), Oracle(p, false).fixed_point()), 1e-9);
    }
}

TEST(PassiveAmplitudes, NoZeroOfC20OnADenseGrid)
{
    SystemParams p = SystemParams::reference();
    p.kappa2 = -1.0;
    double lo = INFINITY;
    for (int i = 0; i <= 4000; ++i) {
        p.delta1 = p.delta2 = -1.0 + i * 5e-4;
        lo = std::min(lo, std::abs(passive_amplitudes(p).c20));
    }
    EXPECT_GT(lo, 1e-8);
}

TEST(UnequalDetuning, MatchesFixedPointAndVanishesOnTheLine)
{
    std::mt19937_64 rng(36);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
        SystemParams p = random_point(rng);
        p.delta2 = d(rng);
        const complex c20 = unequal_detuning_c20(p);
        const complex oracle = Oracle(p, false).fixed_point()[2];
        EXPECT_LT(std::abs(c20 - oracle) / std::abs(oracle), 1e-9);
        p.delta2 = p.kerr_shift() - p.delta1;
        EXPECT_LT(std::abs(unequal_detuning_c20(p)), 1e-14);
    }
}

TEST(SchrodingerOde, SettlesToTheFixedPointWithTwoLossyCavities)
{
    SystemParams p = SystemParams::reference();
    p.kappa2 = -1.0;
    p.delta1 = p.delta2 = 0.1;
    const AmplitudeSet ode = schrodinger_ode_amplitudes(p, 200.0);
    EXPECT_LT(max_rel(ode.as_array(), amplitude_fixed_point(p, true).as_array()), 1e-6);
}

TEST(SchrodingerOde, ReportsDivergenceWithGain)
{
    SystemParams p = SystemParams::reference();
    p.delta1 = p.delta2 = 0.045;
    try {
        schrodinger_ode_amplitudes(p, 200.0);
        FAIL() << "expected NonConvergence";
    } catch (const NonConvergence& e) {
        EXPECT_GT(e.drift, 1e-8);
    }
}

TEST(Correlations, ExactAndApproximateForms)
{
    AmplitudeSet a;
    a.c10 = {0.1, 0.0};
    a.c01 = {0.0, 0.2};
    a.c20 = {0.003, 0.0};
    a.c11 = {0.0, 0.004};
    a.c02 = {0.005, 0.0};
    const CorrelationRecord ap = correlations_from_amplitudes(a, CorrelationForm::approximate);
    EXPECT_NEAR(*ap.g1, 2 * 9e-6 / 1e-4, 1e-12);
    EXPECT_NEAR(*ap.g2, 2 * 25e-6 / 16e-4, 1e-12);
    EXPECT_NEAR(*ap.g12, 16e-6 / (0.01 * 0.04), 1e-12);
    const CorrelationRecord ex = correlations_from_amplitudes(a, CorrelationForm::exact);
    const double n1 = 0.01 + 16e-6 + 2 * 9e-6, n2 = 0.04 + 16e-6 + 2 * 25e-6;
    EXPECT_NEAR(ex.n1, n1, 1e-15);
    EXPECT_NEAR(ex.n2, n2, 1e-15);
    EXPECT_NEAR(*ex.g1, 2 * 9e-6 / (n1 * n1), 1e-12);
    EXPECT_NEAR(*ex.g12, 16e-6 / (n1 * n2), 1e-12);
}

TEST(Correlations, UndefinedAndInvalidCases)
{
    EXPECT_THROW(correlations_from_amplitudes(AmplitudeSet{}, CorrelationForm::exact), std::invalid_argument);
    AmplitudeSet a;
    a.c10 = 0.1;
    const CorrelationRecord r = correlations_from_amplitudes(a, CorrelationForm::approximate);
    EXPECT_EQ(*r.g1, 0.0);
    EXPECT_FALSE(r.g2.has_value()); // 0/0
    a.c02 = 0.01;
    EXPECT_THROW(correlations_from_amplitudes(a, CorrelationForm::approximate), std::domain_error);
}

TEST(Correlations, CoherentLimitIsExactlyOne)
{
    SystemParams p = SystemParams::reference();
    p.g = 0.0;
    for (double d : {-0.7, -0.1, 0.2, 0.9}) {
        p.delta1 = p.delta2 = d;
        const CorrelationRecord r = correlations_from_amplitudes(pt_amplitudes(p), CorrelationForm::approximate);
        const double eps4 = 4.0 * std::numeric_limits<double>::epsilon();
        EXPECT_NEAR(*r.g1, 1.0, eps4);
        EXPECT_NEAR(*r.g2, 1.0, eps4);
        EXPECT_NEAR(*r.g12, 1.0, eps4);
    }
}

TEST(PtPhase, ClassificationAroundTheExceptionalPoint)
{
    SystemParams p = SystemParams::reference();
    p.J = 0.5;
    const PTPhase ep = pt_eigenvalues(p, Subspace::linear);
    EXPECT_EQ(ep.classification, PhaseClass::ExceptionalPoint);
    EXPECT_LT(std::abs(ep.eigenvalues[0] - ep.eigenvalues[1]), 1e-12);
    p.J = 0.7;
    const PTPhase un = pt_eigenvalues(p, Subspace::linear);
    EXPECT_EQ(un.classification, PhaseClass::Unbroken);
    EXPECT_NEAR(un.eigenvalues[0].real(), std::sqrt(0.49 - 0.25), 1e-14);
    EXPECT_EQ(un.eigenvalues[0].imag(), 0.0);
    p.J = 0.4;
    const PTPhase br = pt_eigenvalues(p, Subspace::linear);
    EXPECT_EQ(br.classification, PhaseClass::Broken);
    EXPECT_NEAR(std::abs(br.eigenvalues[0].imag()), 0.3, 1e-14);
    EXPECT_EQ(phase_code(PhaseClass::Broken), -1);
    EXPECT_EQ(phase_code(PhaseClass::Unbroken), 1);
}

TEST(PtPhase, UnbalancedCaseMatchesNumericEigenvalues)
{
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        SystemParams p = SystemParams::reference();
        p.delta1 = u(rng);
        p.delta2 = u(rng);
        p.kappa2 = 1.0 + 0.5 * u(rng);
        p.J = 0.6 + 0.5 * u(rng);
        const PTPhase ph = pt_eigenvalues(p, Subspace::single_excitation);
        Eigen::Matrix2cd h;
        h << complex{p.delta1 - p.kerr_shift(), -0.5}, p.J, p.J, complex{p.delta2, p.kappa2 / 2};
        const Eigen::Vector2cd ev = h.eigenvalues();
        const double d1 = std::min(std::abs(ev(0) - ph.eigenvalues[0]) + std::abs(ev(1) - ph.eigenvalues[1]),
                                   std::abs(ev(0) - ph.eigenvalues[1]) + std::abs(ev(1) - ph.eigenvalues[0]));
        EXPECT_LT(d1, 1e-12);
    }
}

TEST(PtPhase, DipLocations)
{
    SystemParams p = SystemParams::reference();
    p.J = 0.7;
    const auto d = cpb_dip_locations(p);
    ASSERT_EQ(d.size(), 2u);
    EXPECT_NEAR(d[0], -0.4449, 5e-5);
    EXPECT_NEAR(d[1], 0.5349, 5e-5);
    p.J = 0.4;
    EXPECT_TRUE(cpb_dip_locations(p).empty());
}

TEST(PassiveConditions, NotJointlySoluble)
{
    SystemParams p = SystemParams::reference();
    p.kappa2 = -1.0;
    const BlockadeConditionReport r = passive_blockade_condition_check(p);
    EXPECT_TRUE(r.in_scope);
    EXPECT_FALSE(r.jointly_soluble);
    ASSERT_EQ(r.candidates.size(), 2u);
    EXPECT_EQ(r.candidates[0].delta1, 0.0);
    EXPECT_DOUBLE_EQ(r.candidates[1].delta1, 9.0 / 400.0);
    for (const auto& c : r.candidates) {
        EXPECT_TRUE(c.second_satisfied);
        EXPECT_FALSE(c.first_satisfied);
    }
}
