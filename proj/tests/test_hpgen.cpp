#include <gtest/gtest.h>

#include <gmpxx.h>
#include <mpfr.h>

#include <cmath>
#include <random>
#include <sstream>

#include "powcorr/hpgen.hpp"

using namespace powcorr;

namespace {

DyadicRational random_base(std::mt19937_64& rng, int bits) {
    // x in (1, 3) with `bits` fractional bits.
    const mpz_class num = mpz_class(static_cast<unsigned long>((rng() % ((2ul << bits) - 1)) + 1)) +
                          (mpz_class(1) << bits);
    return {num, static_cast<std::uint64_t>(bits)};
}

double circle_gap(double a, double b) {
    const double d = std::fabs(a - b);
    return std::min(d, 1.0 - d);
}

}  // namespace

TEST(SampleX, ForcedDrawGivesTwo) {
    const auto x = sample_x_from_draw(DyadicRational::parse("1.5"), 4, mpz_class(8));  // u = 8/16
    EXPECT_EQ(x, DyadicRational{2});
    EXPECT_EQ(x.to_string(), "2/2^0");
}

TEST(SampleX, RejectsBaseAtMostOne) {
    EXPECT_THROW(sample_x(DyadicRational{1}, 64, 3), DomainError);
    EXPECT_THROW(sample_x(1.0, 64, 3), DomainError);
    EXPECT_THROW(sample_x(DyadicRational::parse("1.5"), 7, 3), DomainError);
}

TEST(SampleX, SeededValueIsLocked) {
    const auto a = DyadicRational::parse("1.02");
    const auto x = sample_x(a, 64, 7);
    EXPECT_EQ(x.to_string(), "32731631593859053991/2^64");
    EXPECT_EQ(x, sample_x(a, 64, 7));
    EXPECT_GE(x, a);
    EXPECT_LT(x, a + DyadicRational{1});
}

TEST(ExactOracle, ThreeHalves) {
    const auto s = exact_frac_powers(DyadicRational::parse("3/2"), DyadicRational{1}, 3);
    ASSERT_EQ(s.points.size(), 3u);
    EXPECT_EQ(s.points[0], 0.5);
    EXPECT_EQ(s.points[1], 0.25);
    EXPECT_EQ(s.points[2], 0.375);
    EXPECT_EQ(s.err_bound, 0.0);
    EXPECT_EQ(s.total_error(), std::ldexp(1.0, -53));
}

TEST(ExactOracle, IntegerBaseGivesZeros) {
    for (const auto& s : {exact_frac_powers(DyadicRational{2}, DyadicRational{1}, 5),
                          ladder_frac_powers(DyadicRational{2}, DyadicRational{1}, 5, 64),
                          ladder_frac_powers(DyadicRational{3}, DyadicRational{5}, 40, 64)})
        for (double p : s.points) EXPECT_EQ(p, 0.0);
}

TEST(ExactOracle, MatchesHighPrecisionFloat) {
    // 1.05 snapped to the 2^-20 grid; MPFR at 4096 bits is an independent evaluation.
    const DyadicRational x{mpz_class(static_cast<long>(std::nearbyint(1.05 * (1 << 20)))), 20};
    const auto s = exact_frac_powers(x, DyadicRational{1}, 100);
    mpfr_t v, base, ip;
    mpfr_inits2(4096, v, base, ip, nullptr);
    mpfr_set_d(base, x.to_double(), MPFR_RNDN);
    for (unsigned n = 1; n <= 100; ++n) {
        mpfr_pow_ui(v, base, n, MPFR_RNDN);
        mpfr_frac(v, v, MPFR_RNDN);
        EXPECT_NEAR(s.points[n - 1], mpfr_get_d(v, MPFR_RNDN), 1e-12) << n;
    }
    mpfr_clears(v, base, ip, nullptr);
}

TEST(ExactOracle, MemoryBudget) {
    EXPECT_THROW(exact_frac_powers(DyadicRational::parse("3/2"), DyadicRational{1}, 2000, 1000), ResourceError);
}

TEST(Ladder, ThreeHalvesWithinBound) {
    const auto s = ladder_frac_powers(DyadicRational::parse("3/2"), DyadicRational{1}, 3, 64);
    const double expect[] = {0.5, 0.25, 0.375};
    for (int i = 0; i < 3; ++i) EXPECT_LE(std::fabs(s.points[i] - expect[i]), std::ldexp(1.0, -60));
}

TEST(Ladder, RejectsSmallGuard) {
    EXPECT_THROW(ladder_frac_powers(DyadicRational::parse("3/2"), DyadicRational{1}, 3, 31), DomainError);
}

// Property: the ladder's exact fractional parts lie within err_bound of the
// exact oracle in the circle metric, for random x, xi and N <= 512.
TEST(Ladder, WithinCertifiedBoundOfOracle) {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 40; ++trial) {
        const auto x = random_base(rng, 8 + static_cast<int>(rng() % 40));
        const DyadicRational xi{mpz_class(static_cast<long>(rng() % 2001) - 1000) + (rng() % 2 ? 0 : 1), rng() % 12};
        if (xi.sign() == 0) continue;
        const std::size_t n = 1 + rng() % 512;
        const int g = 64 + static_cast<int>(rng() % 40);
        const auto exact = exact_fractions(x, xi, n);
        const auto ladder = ladder_fractions(x, xi, n, g);
        const auto bound = DyadicRational::from_double(ladder.err_bound);
        for (std::size_t i = 0; i < n; ++i) ASSERT_LE(circle_distance(exact[i], ladder.fracs[i]), bound) << trial << ":" << i;
        // Stored points: within the total error of the oracle's points.
        const auto s = ladder_frac_powers(x, xi, n, g);
        const auto o = exact_frac_powers(x, xi, n);
        for (std::size_t i = 0; i < n; ++i)
            ASSERT_LE(circle_gap(s.points[i], o.points[i]), s.total_error() + o.total_error());
    }
}

TEST(Ladder, ErrorBoundShape) {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 50; ++i) {
        const auto x = random_base(rng, 30);
        const std::size_t n = 1 + rng() % 100000;
        const int g = 64 + static_cast<int>(rng() % 64);
        const double xd = x.to_double();
        const double cap = std::ldexp(1.0, -g + 2 + static_cast<int>(std::ceil(std::log2(static_cast<double>(n))))) *
                           xd / (xd - 1);
        EXPECT_LT(ladder_error_bound(x, n, g), cap);
    }
}

TEST(Ladder, LargeNCertifiesTinyError) {
    const DyadicRational x{mpz_class(static_cast<long>(std::nearbyint(1.02 * (1 << 20)))), 20};
    const auto s = ladder_frac_powers(x, DyadicRational{1}, 100000, 96);
    EXPECT_EQ(s.points.size(), 100000u);
    EXPECT_LT(s.err_bound, 1e-20);
}

TEST(Ladder, Deterministic) {
    const auto x = sample_x(DyadicRational::parse("1.5"), 64, 1);
    const auto a = ladder_frac_powers(x, DyadicRational::parse("3/4"), 700, 80);
    const auto b = ladder_frac_powers(x, DyadicRational::parse("3/4"), 700, 80);
    EXPECT_EQ(a.points, b.points);
    EXPECT_EQ(a.err_bound, b.err_bound);
}

TEST(Ladder, PrecisionGateReportsGuardBits) {
    const auto x = DyadicRational::parse("3/2");
    try {
        ladder_frac_powers(x, DyadicRational{1}, 1000, 32, 1e-9);
        FAIL() << "expected PrecisionError";
    } catch (const PrecisionError& e) {
        EXPECT_GT(e.required_guard_bits, 32);
        const auto ok = ladder_frac_powers(x, DyadicRational{1}, 1000, e.required_guard_bits, 1e-9);
        EXPECT_LT(ok.total_error(), 1e-11);
    }
}

TEST(Budget, ScheduleInvariants) {
    for (const auto& xs : {"3/2", "1.05", "2.75"}) {
        const auto x = DyadicRational::parse(xs);
        const std::size_t n = 300;
        const PrecisionBudget b(x, n, 70);
        EXPECT_EQ(b.frac_bits(n), 70u);
        for (std::size_t k = 1; k <= n; ++k) EXPECT_LE(b.frac_bits(k), b.frac_bits(k - 1));
        std::uint64_t widest = 0;
        for (std::size_t k = 0; k <= n; ++k) {
            const auto ip = static_cast<std::uint64_t>(std::ceil(static_cast<double>(k) * std::log2(x.to_double())));
            widest = std::max(widest, ip + b.frac_bits(k));
        }
        EXPECT_GE(b.total_bits(), widest);
    }
}

TEST(RequiredBits, Examples) {
    EXPECT_GE(required_bits(DyadicRational{2}, 10, 1.0), 10u);
    const auto v = required_bits(DyadicRational::parse("1.05"), 100000, 1e-12);
    const double whole = std::ceil(100000 * std::log2(1.05));
    EXPECT_EQ(v, static_cast<std::uint64_t>(whole + std::ceil(std::log2(1e5 / 1e-12)) + 8));
    EXPECT_NEAR(static_cast<double>(v), 7040 + 57 + 8, 2);
    EXPECT_THROW(required_bits(DyadicRational::parse("1.5"), 0, 1.0), DomainError);
    EXPECT_LT(required_bits(DyadicRational::parse("1.5"), 10, 1e-3), required_bits(DyadicRational::parse("1.5"), 11, 1e-3));
    EXPECT_LT(required_bits(DyadicRational::parse("1.5"), 10, 1e-3), required_bits(DyadicRational::parse("1.5"), 10, 1e-6));
}

TEST(SampleFile, RoundTrip) {
    const auto s = ladder_frac_powers(DyadicRational::parse("13/8"), DyadicRational::parse("3/2"), 50, 72);
    std::stringstream io;
    write_sample(io, s);
    const auto header = io.str().substr(0, io.str().find('\n'));
    EXPECT_EQ(header.rfind("# powcorr-sample x=13/2^3 xi=3/2^1 N=50 g=72 err_bound=", 0), 0u);
    const auto back = read_sample(io);
    EXPECT_EQ(back.points, s.points);
    EXPECT_EQ(back.base, s.base);
    EXPECT_EQ(back.xi, s.xi);
    EXPECT_EQ(back.err_bound, s.err_bound);
    EXPECT_EQ(back.guard_bits, 72);
}
