#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>

#include "powcorr/fourier.hpp"

using namespace powcorr;

namespace {

// c_l by adaptive quadrature of G(t) cos(2 pi l t), split at the breakpoints.
double coefficient_oracle(const CenteredMollifier& g, long l) {
    const auto& f = g.base;
    const auto integrand = [&](double t) { return g(t) * std::cos(2.0 * std::numbers::pi * l * t); };
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    const double p = f.plateau, r = f.support_end;
    double sum = GK::integrate(integrand, 0.0, p, 20, 1e-15) + GK::integrate(integrand, p, r, 20, 1e-15);
    const double tail = std::sin(2.0 * std::numbers::pi * l * 0.5) - std::sin(2.0 * std::numbers::pi * l * r);
    sum += -g.mean * tail / (2.0 * std::numbers::pi * l);
    return 2.0 * sum;
}

}  // namespace

TEST(Fourier, ZeroCoefficientVanishes) {
    const auto g = centered(make_outer(1.0, 10));
    EXPECT_EQ(fourier_coefficient(g, 0), 0.0);
    EXPECT_EQ(coefficients(g, 5).coeffs[0], 0.0);
}

TEST(Fourier, ClosedFormMatchesQuadratureOracle) {
    for (std::size_t n : {10u, 40u})
        for (auto f : {make_outer(1.0, n), make_inner(1.0, n)}) {
            const auto g = centered(f);
            for (long l : {1L, 2L, 7L, 33L})
                EXPECT_NEAR(fourier_coefficient(g, l), coefficient_oracle(g, l), 1e-12) << n << " " << l;
        }
}

TEST(Fourier, CoefficientsEvenInL) {
    const auto g = centered(make_outer(1.0, 20));
    for (long l = 1; l < 50; ++l) EXPECT_EQ(fourier_coefficient(g, l), fourier_coefficient(g, -l));
}

TEST(Fourier, SmallOmegaSeriesAgreesWithClosedForm) {
    // Across |b| = 1 both branches of the ramp moment must agree.
    for (double a : {0.0, 0.3, 2.0})
        EXPECT_NEAR(detail::ramp_sine_moment(a, 0.999999), detail::ramp_sine_moment(a, 1.000001), 1e-6);
}

TEST(Fourier, CoefficientBound) {
    const auto g = centered(make_outer(1.0, 30));
    for (long l = 1; l <= 5000; ++l) EXPECT_LE(std::fabs(fourier_coefficient(g, l)), 2.0 * g.mean + 1e-15);
}

TEST(Fourier, ZeroCutoffSupIsMaxOfPlateauAndFloor) {
    const auto g = centered(make_outer(1.0, 10));
    const auto sup = truncation_sup(g, 0, 4096);
    EXPECT_DOUBLE_EQ(sup.sup, std::max(1.0 - g.mean, g.mean));
}

TEST(Fourier, DoublingLadderNonIncreasing) {
    const std::size_t n = 10;
    const auto g = centered(make_outer(1.0, n));
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t l = 16; l <= n * n * n; l *= 2) {
        const double s = truncation_sup(g, l, 8 * l).sup;
        EXPECT_LE(s, prev * (1 + 1e-9)) << l;
        if (l >= 2 * n * n) EXPECT_LE(s, 0.75 * prev) << l;
        prev = s;
    }
}

TEST(Fourier, TruncationSupLock) {
    const auto g = centered(make_outer(1.0, 10));
    EXPECT_NEAR(truncation_sup(g, 4096, 8 * 4096).sup, 1.1080253340789437e-05, 1e-17);
}

TEST(Fourier, GridAgreesWithDirectSum) {
    const auto ft = coefficients(centered(make_outer(1.0, 10)), 200);
    const auto grid = partial_sum_grid(ft, 1600);
    for (std::size_t k = 0; k <= 1600; k += 37) {
        EXPECT_NEAR(grid[k], partial_sum_direct(ft, 0.5 * k / 1600.0), 1e-13);
        EXPECT_NEAR(grid[k], ft.partial_sum(0.5 * k / 1600.0), 1e-12);
    }
}

TEST(Fourier, ParsevalIncreasesTowardL2Norm) {
    const auto g = centered(make_outer(1.0, 10));
    const double norm = centered_l2_squared(g);
    double prev = 0;
    for (std::size_t l : {8u, 64u, 512u, 4096u}) {
        const double p = coefficients(g, l).parseval_sum();
        EXPECT_GE(p, prev);
        EXPECT_LE(p, norm * (1 + 1e-12));
        prev = p;
    }
    EXPECT_NEAR(prev, norm, 1e-6 * norm);
}

TEST(Fourier, PartialSumIsEven) {
    const auto ft = coefficients(centered(make_outer(1.0, 10)), 300);
    for (double t : {0.01, 0.1, 0.2513, 0.4}) EXPECT_EQ(ft.partial_sum(t), ft.partial_sum(-t));
}

TEST(Fourier, DomainErrors) {
    const auto g = centered(make_outer(1.0, 10));
    EXPECT_THROW(coefficients(g, 0), DomainError);
    EXPECT_THROW(truncation_sup(g, 100, 10), DomainError);
    EXPECT_THROW(jackson_trend(1.0, {10}, CutoffRule::cube), DomainError);
    EXPECT_THROW(jackson_trend(1.0, {10, 20, 15}, CutoffRule::cube), DomainError);
}

TEST(Fourier, ConstantCutoffFlaggedNonDecreasing) {
    const auto tr = jackson_trend(1.0, {10, 20, 40}, CutoffRule::constant, 64);
    EXPECT_TRUE(tr.non_decreasing);
    EXPECT_FALSE(tr.pass());
}

TEST(Fourier, CubeCutoffEnvelope) {
    const auto tr = jackson_trend(1.0, {4, 6, 8}, CutoffRule::cube);
    ASSERT_EQ(tr.points.size(), 3u);
    for (const auto& p : tr.points) EXPECT_EQ(p.cutoff, p.n * p.n * p.n);
    EXPECT_FALSE(tr.non_decreasing);
    EXPECT_EQ(tr.residuals.size(), 3u);
}

TEST(Dirichlet, Examples) {
    EXPECT_EQ(dirichlet_kernel(3, 0.0), 7.0);
    EXPECT_EQ(dirichlet_kernel(3, 2.0), 7.0);
    EXPECT_NEAR(dirichlet_kernel(0, 0.3), 1.0, 1e-15);
    EXPECT_NEAR(dirichlet_kernel(1, 0.25), 1.0, 1e-15);  // 1 + 2 cos(pi/2)
    EXPECT_NEAR(dirichlet_kernel(2, 0.5), 1.0, 1e-14);   // 1 - 2 + 2
}

TEST(Dirichlet, UnitIntegral) {
    const auto d = [](double t) { return dirichlet_kernel(5, t); };
    const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(d, -0.5, 0.5, 15, 1e-14);
    EXPECT_NEAR(v, 1.0, 1e-12);
}
