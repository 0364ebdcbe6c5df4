#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ptblockade/linalg/gmres.hpp"
#include "ptblockade/linalg/ode.hpp"

using namespace ptb;
using complex = std::complex<double>;

TEST(DormandPrince, ComplexExponential)
{
    const complex lambda{-0.3, 2.0};
    const auto f = [&](double, const OdeState& y, OdeState& dy) { dy[0] = lambda * y[0]; };
    for (double tol : {1e-6, 1e-9, 1e-12}) {
        const OdeState y = ode_integrate(f, {complex{1.0, 0.0}}, 5.0, tol, tol * 1e-3);
        const complex exact = std::exp(lambda * 5.0);
        EXPECT_LT(std::abs(y[0] - exact), 200.0 * tol) << "tol " << tol;
    }
}

TEST(DormandPrince, TighterToleranceCostsMoreSteps)
{
    const auto f = [](double, const OdeState& y, OdeState& dy) {
        dy[0] = y[1];
        dy[1] = -y[0];
    };
    std::size_t previous = 0;
    for (double tol : {1e-5, 1e-8, 1e-11}) {
        OdeOptions o;
        o.rel_tol = tol;
        o.abs_tol = tol;
        DormandPrince dp(f, o);
        OdeState y{1.0, 0.0};
        double t = 0.0;
        dp.advance(y, t, 20.0);
        EXPECT_EQ(t, 20.0);
        EXPECT_NEAR(std::norm(y[0]) + std::norm(y[1]), 1.0, 1e3 * tol);
        EXPECT_GT(dp.stats().accepted, previous);
        previous = dp.stats().accepted;
    }
}

TEST(DormandPrince, AdvanceInPiecesMatchesOneShot)
{
    const auto f = [](double t, const OdeState& y, OdeState& dy) { dy[0] = complex{0.0, t} * y[0]; };
    OdeOptions o;
    o.rel_tol = 1e-12;
    o.abs_tol = 1e-14;
    DormandPrince dp(f, o);
    OdeState y{1.0};
    double t = 0.0;
    for (double stop : {0.5, 1.0, 2.0, 3.0}) dp.advance(y, t, stop);
    EXPECT_LT(std::abs(y[0] - std::exp(complex{0.0, 4.5})), 1e-9); // y = exp(i t^2 / 2)
}

TEST(DormandPrince, BlowUpRaisesWithTimeReached)
{
    // y' = y^2, y(0) = 1 has y = 1 / (1 - t).
    const auto f = [](double, const OdeState& y, OdeState& dy) { dy[0] = y[0] * y[0]; };
    try {
        ode_integrate(f, {complex{1.0, 0.0}}, 2.0, 1e-8, 1e-10);
        FAIL() << "expected IntegratorFailure";
    } catch (const IntegratorFailure& e) {
        EXPECT_GT(e.time_reached, 0.9);
        EXPECT_LE(e.time_reached, 1.0 + 1e-6);
    }
}

TEST(DormandPrince, RejectsNonPositiveTolerances)
{
    OdeOptions o;
    o.rel_tol = 0.0;
    EXPECT_THROW(DormandPrince([](double, const OdeState&, OdeState&) {}, o), std::invalid_argument);
}

namespace {

struct DenseSystem {
    std::size_t n;
    std::vector<complex> a; // row-major
    void apply(const KrylovVector& x, KrylovVector& y) const
    {
        y.assign(n, complex{});
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) y[i] += a[i * n + j] * x[j];
    }
};

DenseSystem random_system(std::size_t n, double diag, std::mt19937_64& rng)
{
    std::normal_distribution<double> g(0.0, 1.0 / std::sqrt(double(n)));
    DenseSystem s{n, std::vector<complex>(n * n)};
    for (auto& v : s.a) v = {g(rng), g(rng)};
    for (std::size_t i = 0; i < n; ++i) s.a[i * n + i] += diag;
    return s;
}

} // namespace

TEST(Gmres, ConvergesOnWellConditionedSystem)
{
    std::mt19937_64 rng(11);
    const DenseSystem s = random_system(40, 3.0, rng);
    KrylovVector x_true(40), b;
    for (std::size_t i = 0; i < 40; ++i) x_true[i] = {std::sin(double(i)), std::cos(double(i))};
    s.apply(x_true, b);
    const GmresResult r = gmres([&](const KrylovVector& in, KrylovVector& out) { s.apply(in, out); }, {}, b, {},
                                GmresOptions{1e-12, 20, 500});
    ASSERT_TRUE(r.converged);
    EXPECT_LT(r.relative_residual, 1e-12);
    double err = 0.0;
    for (std::size_t i = 0; i < 40; ++i) err = std::max(err, std::abs(r.x[i] - x_true[i]));
    EXPECT_LT(err, 1e-10);
}

TEST(Gmres, ExactPreconditionerConvergesInOneIteration)
{
    // A = diag(d), M^{-1} = diag(1/d)
    const std::size_t n = 30;
    std::vector<complex> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = {1.0 + double(i), 0.1 * double(i)};
    const auto a = [&](const KrylovVector& in, KrylovVector& out) {
        out.resize(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = d[i] * in[i];
    };
    const auto m = [&](const KrylovVector& in, KrylovVector& out) {
        out.resize(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = in[i] / d[i];
    };
    const KrylovVector b(n, complex{1.0, -1.0});
    const GmresResult r = gmres(a, m, b, {}, GmresOptions{});
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.iterations, 1u);
    for (std::size_t i = 0; i < n; ++i) EXPECT_LT(std::abs(r.x[i] - b[i] / d[i]), 1e-13);
}

TEST(Gmres, ZeroRightHandSideGivesZero)
{
    const GmresResult r = gmres([](const KrylovVector& in, KrylovVector& out) { out = in; }, {},
                                KrylovVector(5, complex{}), {}, GmresOptions{});
    EXPECT_TRUE(r.converged);
    for (const auto& v : r.x) EXPECT_EQ(v, complex{});
}

TEST(Gmres, ReportsNonConvergence)
{
    // Singular operator with b outside its range: the residual cannot drop.
    const auto a = [](const KrylovVector& in, KrylovVector& out) {
        out = in;
        out[0] = 0.0;
    };
    KrylovVector b(4, complex{});
    b[0] = 1.0;
    const GmresResult r = gmres(a, {}, b, {}, GmresOptions{1e-12, 4, 20});
    EXPECT_FALSE(r.converged);
    EXPECT_GT(r.relative_residual, 0.5);
}
