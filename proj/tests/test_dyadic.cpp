#include <gtest/gtest.h>

#include <gmpxx.h>

#include <cmath>
#include <random>

#include "powcorr/dyadic.hpp"

using powcorr::DyadicRational;

namespace {

mpq_class as_rational(const DyadicRational& d) {
    mpz_class den;
    mpz_ui_pow_ui(den.get_mpz_t(), 2, d.exponent());
    mpq_class q(d.numerator(), den);
    q.canonicalize();
    return q;
}

}  // namespace

TEST(Dyadic, CanonicalForm) {
    const DyadicRational d{mpz_class(12), 4};  // 12/16 = 3/4
    EXPECT_EQ(d.numerator(), 3);
    EXPECT_EQ(d.exponent(), 2u);
    EXPECT_EQ(DyadicRational(mpz_class(0), 9).exponent(), 0u);
    EXPECT_EQ(DyadicRational(mpz_class(8), 2), DyadicRational{2});
}

TEST(Dyadic, ParseForms) {
    EXPECT_EQ(DyadicRational::parse("3/2^1"), DyadicRational(mpz_class(3), 1));
    EXPECT_EQ(DyadicRational::parse("5/8"), DyadicRational(mpz_class(5), 3));
    EXPECT_EQ(DyadicRational::parse("7"), DyadicRational{7});
    EXPECT_EQ(DyadicRational::parse("1.5"), DyadicRational(mpz_class(3), 1));
    EXPECT_EQ(DyadicRational::parse("1.02"), DyadicRational::from_double(1.02));
    EXPECT_THROW(DyadicRational::parse("1/3"), powcorr::DomainError);
    EXPECT_THROW(DyadicRational::parse("abc"), powcorr::DomainError);
    EXPECT_THROW(DyadicRational::parse(""), powcorr::DomainError);
}

TEST(Dyadic, FromDoubleIsExact) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
        const double v = u(rng) * std::ldexp(1.0, static_cast<int>(rng() % 60) - 30);
        const mpq_class q(v);  // GMP converts binary64 exactly
        EXPECT_EQ(as_rational(DyadicRational::from_double(v)), q);
        EXPECT_EQ(DyadicRational::from_double(v).to_double(), v);
    }
}

TEST(Dyadic, ArithmeticMatchesRationals) {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 500; ++i) {
        const DyadicRational a{mpz_class(static_cast<long>(rng() % 100000) - 50000), rng() % 40};
        const DyadicRational b{mpz_class(static_cast<long>(rng() % 100000) - 50000), rng() % 40};
        EXPECT_EQ(as_rational(a + b), as_rational(a) + as_rational(b));
        EXPECT_EQ(as_rational(a - b), as_rational(a) - as_rational(b));
        EXPECT_EQ(as_rational(a * b), as_rational(a) * as_rational(b));
        EXPECT_EQ(a < b, as_rational(a) < as_rational(b));
        const mpq_class fa = as_rational(a.frac());
        EXPECT_GE(fa, 0);
        EXPECT_LT(fa, 1);
        EXPECT_EQ(as_rational(a) - fa, mpq_class(a.floor()));
    }
}

TEST(Dyadic, PowAndLdexp) {
    const DyadicRational x{mpz_class(3), 1};
    EXPECT_EQ(x.pow(3), DyadicRational(mpz_class(27), 3));
    EXPECT_EQ(x.ldexp(1), DyadicRational{3});
    EXPECT_EQ(x.ldexp(-2), DyadicRational(mpz_class(3), 3));
}

TEST(Dyadic, RoundUnitWrapsToZero) {
    // 1 - 2^-60 rounds to 1.0 in binary64, which wraps on the circle.
    mpz_class r;
    mpz_ui_pow_ui(r.get_mpz_t(), 2, 60);
    r -= 1;
    EXPECT_EQ(powcorr::round_unit(r, 60), 0.0);
    EXPECT_EQ(powcorr::round_unit(mpz_class(1), 1), 0.5);
}

TEST(Dyadic, ToDoubleRoundsToNearest) {
    // (2^53 + 1) / 2^53 is a tie between 1 and 1 + 2^-52; ties go to even.
    mpz_class n;
    mpz_ui_pow_ui(n.get_mpz_t(), 2, 53);
    n += 1;
    EXPECT_EQ(DyadicRational(n, 53).to_double(), 1.0);
    n += 2;  // (2^53 + 3) / 2^53: tie, rounds up to even 1 + 2^-51
    EXPECT_EQ(DyadicRational(n, 53).to_double(), 1.0 + std::ldexp(1.0, -51));
}
