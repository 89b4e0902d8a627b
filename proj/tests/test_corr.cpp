#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "powcorr/corr.hpp"
#include "powcorr/correlation_report.hpp"

using namespace powcorr;

namespace {

// Points on the 2^-40 grid, so shifts mod 1 are exact.
UnitSample grid_sample(std::mt19937_64& rng, std::size_t n) {
    std::vector<double> pts(n);
    for (auto& p : pts) p = std::ldexp(static_cast<double>(rng() >> 24), -40);
    return UnitSample::from_points(std::move(pts));
}

UnitSample shifted(const UnitSample& s, double c) {
    std::vector<double> pts = s.points;
    for (auto& p : pts) {
        p += c;
        if (p >= 1.0) p -= 1.0;
    }
    return UnitSample::from_points(std::move(pts));
}

// Unordered pairs within the window, nearest-integer distance from the definition.
std::uint64_t unordered_oracle(const std::vector<double>& x, double w) {
    std::uint64_t c = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = i + 1; j < x.size(); ++j) {
            const double d = std::fabs(x[i] - x[j]);
            if (std::min(d, 1.0 - d) <= w) ++c;
        }
    return c;
}

}  // namespace

TEST(PairCorr, HandCount) {
    const auto s = UnitSample::from_points({0.1, 0.2, 0.3});
    // Window 1/6 holds (0.1,0.2) and (0.2,0.3) but not (0.1,0.3).
    EXPECT_DOUBLE_EQ(pair_corr(s, 0.5), 4.0 / 3.0);
    EXPECT_DOUBLE_EQ(pair_corr_bruteforce(s, 0.5), 4.0 / 3.0);
}

TEST(PairCorr, AllEqual) {
    const auto s = UnitSample::from_points(std::vector<double>(10, 0.3));
    EXPECT_EQ(pair_corr(s, 1.0), 9.0);
}

TEST(PairCorr, TwoPoints) {
    EXPECT_EQ(pair_corr_bruteforce(UnitSample::from_points({0.0, 0.5}), 0.4), 0.0);
    EXPECT_EQ(pair_corr_bruteforce(UnitSample::from_points({0.0, 0.2}), 0.5), 1.0);
    EXPECT_EQ(pair_corr(UnitSample::from_points({0.0, 0.2}), 0.5), 1.0);
}

TEST(PairCorr, TiesCountInside) {
    const auto s = UnitSample::from_points({0.0, 0.25, 0.75});
    // N = 3, s = 0.75: window exactly 0.25; 0 and 0.75 are 0.25 apart across 1.
    EXPECT_EQ(pair_corr(s, 0.75), pair_corr_bruteforce(s, 0.75));
    EXPECT_EQ(pair_corr(s, 0.75), 4.0 / 3.0);
}

TEST(PairCorr, WindowTooWide) {
    const auto s = UnitSample::from_points({0.1, 0.2, 0.3});
    EXPECT_THROW(pair_corr(s, 1.5), DomainError);
    EXPECT_THROW(pair_corr(s, 0.0), DomainError);
}

TEST(PairCorr, BruteforceCap) {
    const auto s = uniform_sample(300, 1);
    EXPECT_THROW(pair_corr_bruteforce(s, 1.0, 100), ResourceError);
}

TEST(PairCorr, PrecisionGate) {
    auto s = uniform_sample(1000, 1);
    s.err_bound = 1e-6;  // window 1e-3 needs error below 1e-5
    EXPECT_NO_THROW(pair_corr(s, 1.0));
    s.err_bound = 1e-4;
    EXPECT_THROW(pair_corr(s, 1.0), PrecisionError);
}

// Property: the sorted counter equals the O(N^2) oracle exactly.
TEST(PairCorr, OracleEquivalenceRandom) {
    std::mt19937_64 rng(17);
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = 2 + rng() % 600;
        UnitSample s = rng() % 3 == 0 ? grid_sample(rng, n) : uniform_sample(n, rng());
        // Coarse grids force exact ties.
        if (rng() % 4 == 0)
            for (auto& p : s.points) p = std::floor(p * 64.0) / 64.0;
        const double sv = std::uniform_real_distribution<double>(0.01, 0.49)(rng) * static_cast<double>(n);
        ASSERT_EQ(pair_corr(s, sv), pair_corr_bruteforce(s, sv)) << t;
    }
}

TEST(PairCorr, OrderedIsTwiceUnordered) {
    std::mt19937_64 rng(4);
    for (int t = 0; t < 20; ++t) {
        const auto s = grid_sample(rng, 50 + rng() % 200);
        const double sv = 0.8 + (rng() % 100) / 50.0;
        const double w = sv / static_cast<double>(s.n_max);
        EXPECT_EQ(pair_corr(s, sv), 2.0 * static_cast<double>(unordered_oracle(s.points, w)) / static_cast<double>(s.n_max));
    }
}

TEST(PairCorr, ShiftInvariance) {
    std::mt19937_64 rng(8);
    for (int t = 0; t < 20; ++t) {
        const auto s = grid_sample(rng, 100 + rng() % 400);
        const double c = std::ldexp(static_cast<double>(rng() >> 24), -40);
        const auto u = shifted(s, c);
        EXPECT_EQ(pair_corr(s, 1.0), pair_corr(u, 1.0));
        EXPECT_EQ(triple_corr(s, 1.0, 0.5), triple_corr(u, 1.0, 0.5));
        EXPECT_EQ(level_spacings(s).gaps, level_spacings(u).gaps);
    }
}

TEST(PairCorr, UniformControlLocked) {
    const auto s = uniform_sample(5000, 2024);
    const double r2 = pair_corr(s, 1.0);
    EXPECT_NEAR(r2, 2.0, 3.0 * std::sqrt(2.0 / 5000.0));
    EXPECT_EQ(r2, 2.0048);
}

TEST(PairCorr, SmoothedSandwich) {
    std::mt19937_64 rng(21);
    for (int t = 0; t < 30; ++t) {
        const std::size_t n = 20 + rng() % 800;
        const auto s = uniform_sample(n, rng());
        const double sv = 0.5 + (rng() % 100) / 40.0;
        const double inner = pair_corr_smoothed(s, make_inner(sv, n));
        const double outer = pair_corr_smoothed(s, make_outer(sv, n));
        const double r2 = pair_corr(s, sv);
        EXPECT_LE(inner, r2);
        EXPECT_LE(r2, outer);
    }
}

TEST(PairCorr, SmoothedOutsideSupportIsZero) {
    // Equidistant points 1/10 apart; support of the outer mollifier at N=10, s=0.5 is 0.06.
    std::vector<double> pts;
    for (int i = 0; i < 10; ++i) pts.push_back(i / 10.0);
    EXPECT_EQ(pair_corr_smoothed(UnitSample::from_points(pts), make_outer(0.5, 10)), 0.0);
    EXPECT_THROW(pair_corr_smoothed(UnitSample::from_points(pts), make_outer(0.5, 11)), DomainError);
}

TEST(TripleCorr, Examples) {
    EXPECT_EQ(triple_corr(UnitSample::from_points(std::vector<double>(5, 0.4)), 1.0, 1.0), 12.0);
    EXPECT_EQ(triple_corr(UnitSample::from_points({0.0, 0.4, 0.8}), 0.3, 0.3), 0.0);
}

TEST(TripleCorr, OracleEquivalence) {
    std::mt19937_64 rng(30);
    for (int t = 0; t < 60; ++t) {
        const std::size_t n = 3 + rng() % 150;
        auto s = uniform_sample(n, rng());
        if (t % 3 == 0)
            for (auto& p : s.points) p = std::floor(p * 32.0) / 32.0;
        const double s1 = 0.2 + (rng() % 100) / 20.0, s2 = 0.2 + (rng() % 100) / 20.0;
        if (s1 / n >= 0.5 || s2 / n >= 0.5) continue;
        ASSERT_EQ(triple_corr(s, s1, s2), triple_corr_bruteforce(s, s1, s2)) << t;
    }
}

TEST(TripleCorr, UniformLocked) {
    const double r3 = triple_corr(uniform_sample(5000, 2024), 1.0, 1.0);
    EXPECT_NEAR(r3, 4.0, 0.25);
    EXPECT_EQ(r3, 4.0488);
}

TEST(Spacings, EquallySpaced) {
    std::vector<double> pts;
    for (int i = 0; i < 8; ++i) pts.push_back(i / 8.0);
    const auto sp = level_spacings(UnitSample::from_points(pts));
    for (double g : sp.gaps) EXPECT_EQ(g, 1.0);
    ASSERT_EQ(sp.ecdf.size(), 1u);
    EXPECT_EQ(sp.ecdf[0].second, 1.0);
}

TEST(Spacings, TwoPoints) {
    const auto sp = level_spacings(UnitSample::from_points({0.0, 0.25}));
    EXPECT_EQ(sp.gaps, (std::vector<double>{0.5, 1.5}));
    EXPECT_THROW(level_spacings(UnitSample::from_points({0.1})), DomainError);
}

TEST(Spacings, EcdfShapeAndUniformLock) {
    const auto sp = level_spacings(uniform_sample(5000, 2024));
    double sum = 0;
    for (double g : sp.gaps) sum += g;
    EXPECT_NEAR(sum, 5000.0, 1e-9);
    for (std::size_t i = 1; i < sp.ecdf.size(); ++i) {
        EXPECT_GT(sp.ecdf[i].first, sp.ecdf[i - 1].first);
        EXPECT_GE(sp.ecdf[i].second, sp.ecdf[i - 1].second);
    }
    EXPECT_EQ(sp.ecdf.back().second, 1.0);
    EXPECT_NEAR(sp.ks_exponential(), 0.0086854012070914921, 1e-15);
}

TEST(StarDiscrepancy, Examples) {
    EXPECT_EQ(star_discrepancy(UnitSample::from_points({0.0})), 1.0);
    std::vector<double> pts;
    for (int k = 0; k < 100; ++k) pts.push_back((k + 0.5) / 100.0);
    EXPECT_NEAR(star_discrepancy(UnitSample::from_points(pts)), 1.0 / 200.0, 1e-15);
    const double d = star_discrepancy(uniform_sample(1000, 2024));
    EXPECT_LT(d, 3.0 * std::sqrt(std::log(std::log(1000.0)) / 1000.0) + 0.05);
    EXPECT_NEAR(d, 0.051102402518667378, 1e-15);
}

TEST(Control, NAlphaExamples) {
    EXPECT_EQ(control_nalpha(0.5, 4).points, (std::vector<double>{0.5, 0.0, 0.5, 0.0}));
    const auto third = control_nalpha(1.0 / 3.0, 3).points;
    EXPECT_NEAR(third[0], 1.0 / 3.0, 1e-16);
    EXPECT_NEAR(third[1], 2.0 / 3.0, 1e-16);
    // 3 * fl(1/3) = 1 - 2^-54 exactly, which rounds to 1.0 and wraps to 0.
    EXPECT_EQ(third[2], 0.0);
}

TEST(Control, GoldenRatioLocked) {
    const auto g = golden_conjugate(64);
    EXPECT_NEAR(g.to_double(), (std::sqrt(5.0) - 1.0) / 2.0, 1e-16);
    const double r2 = pair_corr(control_nalpha(g, 5000), 1.0);
    EXPECT_EQ(r2, 1.294);
    EXPECT_GT(std::fabs(r2 / 2.0 - 1.0), 0.15);
}

TEST(Report, JsonAndCsv) {
    const auto s = uniform_sample(300, 9);
    const auto r = correlation_report(s, {0.5, 1.0, 2.0}, 9, true, {0.5, 1.0});
    const auto j = to_json(r);
    EXPECT_EQ(j["r2"].size(), 3u);
    EXPECT_EQ(j["r3"].size(), 4u);
    EXPECT_EQ(j["meta"]["N"], 300);
    for (double v : r.r2) EXPECT_GE(v, 0.0);
    std::ostringstream os;
    write_csv(os, r);
    EXPECT_EQ(os.str().substr(0, 9), "s,r2,N,x\n");
    EXPECT_THROW(correlation_report(s, {1.0, 0.5}, 9), DomainError);
    EXPECT_THROW(correlation_report(s, {}, 9), UsageError);
}
