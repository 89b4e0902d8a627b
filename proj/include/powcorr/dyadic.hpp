#pragma once

// Exact dyadic rationals a / 2^b on top of GMP.

#include <gmpxx.h>
#include <mpfr.h>

#include <cmath>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

#include "powcorr/errors.hpp"

namespace powcorr {

namespace detail {

/// Correctly rounded (nearest-even) value of num / 2^exp.
inline double ldexp_rounded(const mpz_class& num, std::uint64_t exp) {
    mpfr_t f;
    mpfr_init2(f, 53);
    mpfr_set_z_2exp(f, num.get_mpz_t(), -static_cast<long>(exp), MPFR_RNDN);
    const double d = mpfr_get_d(f, MPFR_RNDN);
    mpfr_clear(f);
    return d;
}

}  // namespace detail

/// numerator / 2^exponent, kept canonical: numerator odd or exponent zero.
class DyadicRational {
public:
    DyadicRational() = default;
    DyadicRational(mpz_class numerator, std::uint64_t exponent)
        : num_(std::move(numerator)), exp_(exponent) {
        canonicalize();
    }
    DyadicRational(long value) : num_(value), exp_(0) {}  // NOLINT: implicit by design of integer literals

    /// Exact value of a finite binary64.
    static DyadicRational from_double(double value) {
        if (!std::isfinite(value)) throw DomainError("dyadic rational from non-finite double");
        if (value == 0.0) return {};
        int e = 0;
        const double m = std::frexp(value, &e);  // value = m * 2^e, 0.5 <= |m| < 1
        const auto mant = static_cast<std::int64_t>(std::ldexp(m, 53));
        mpz_class num(static_cast<long>(mant));
        const long shift = static_cast<long>(e) - 53;
        if (shift >= 0) {
            mpz_mul_2exp(num.get_mpz_t(), num.get_mpz_t(), static_cast<mp_bitcnt_t>(shift));
            return {num, 0};
        }
        return {num, static_cast<std::uint64_t>(-shift)};
    }

    /// Accepts "a/2^b", "a/b" with b a power of two, an integer, or a decimal
    /// literal (taken as its nearest binary64, which is itself dyadic).
    static DyadicRational parse(std::string_view text) {
        const std::string s(text);
        if (s.empty()) throw DomainError("empty dyadic literal");
        const auto slash = s.find('/');
        try {
            if (slash != std::string::npos) {
                mpz_class num(s.substr(0, slash));
                std::string den = s.substr(slash + 1);
                if (den.rfind("2^", 0) == 0) return {num, std::stoull(den.substr(2))};
                mpz_class d(den);
                if (d <= 0 || mpz_popcount(d.get_mpz_t()) != 1)
                    throw DomainError("denominator is not a power of two: " + s);
                return {num, mpz_sizeinbase(d.get_mpz_t(), 2) - 1};
            }
            if (s.find_first_of(".eE") == std::string::npos) return {mpz_class(s), 0};
        } catch (const std::invalid_argument&) {
            throw DomainError("malformed dyadic literal: " + s);
        }
        std::size_t used = 0;
        double d = 0;
        try {
            d = std::stod(s, &used);
        } catch (const std::exception&) {
            throw DomainError("malformed dyadic literal: " + s);
        }
        if (used != s.size()) throw DomainError("malformed dyadic literal: " + s);
        return from_double(d);
    }

    const mpz_class& numerator() const { return num_; }
    std::uint64_t exponent() const { return exp_; }

    int sign() const { return sgn(num_); }
    bool is_integer() const { return exp_ == 0; }

    double to_double() const { return detail::ldexp_rounded(num_, exp_); }

    /// num scaled to 2^target_exp denominator; target_exp must be >= exponent().
    mpz_class scaled_numerator(std::uint64_t target_exp) const {
        mpz_class r;
        mpz_mul_2exp(r.get_mpz_t(), num_.get_mpz_t(), target_exp - exp_);
        return r;
    }

    mpz_class floor() const {
        mpz_class r;
        mpz_fdiv_q_2exp(r.get_mpz_t(), num_.get_mpz_t(), exp_);
        return r;
    }

    /// Fractional part in [0, 1).
    DyadicRational frac() const {
        mpz_class r;
        mpz_fdiv_r_2exp(r.get_mpz_t(), num_.get_mpz_t(), exp_);
        return {r, exp_};
    }

    DyadicRational pow(unsigned long n) const {
        mpz_class r;
        mpz_pow_ui(r.get_mpz_t(), num_.get_mpz_t(), n);
        return {r, exp_ * n};
    }

    /// this * 2^shift (shift may be negative).
    DyadicRational ldexp(long shift) const {
        if (shift >= 0) {
            if (static_cast<std::uint64_t>(shift) <= exp_) return {num_, exp_ - static_cast<std::uint64_t>(shift)};
            mpz_class r;
            mpz_mul_2exp(r.get_mpz_t(), num_.get_mpz_t(), static_cast<std::uint64_t>(shift) - exp_);
            return {r, 0};
        }
        return {num_, exp_ + static_cast<std::uint64_t>(-shift)};
    }

    friend DyadicRational operator+(const DyadicRational& a, const DyadicRational& b) {
        const auto e = std::max(a.exp_, b.exp_);
        return {a.scaled_numerator(e) + b.scaled_numerator(e), e};
    }
    friend DyadicRational operator-(const DyadicRational& a, const DyadicRational& b) {
        const auto e = std::max(a.exp_, b.exp_);
        return {a.scaled_numerator(e) - b.scaled_numerator(e), e};
    }
    friend DyadicRational operator*(const DyadicRational& a, const DyadicRational& b) {
        return {a.num_ * b.num_, a.exp_ + b.exp_};
    }
    DyadicRational operator-() const { return {-num_, exp_}; }
    DyadicRational abs() const { return {::abs(num_), exp_}; }

    friend bool operator==(const DyadicRational& a, const DyadicRational& b) {
        return a.exp_ == b.exp_ && a.num_ == b.num_;
    }
    friend std::strong_ordering operator<=>(const DyadicRational& a, const DyadicRational& b) {
        const auto e = std::max(a.exp_, b.exp_);
        const int c = cmp(a.scaled_numerator(e), b.scaled_numerator(e));
        return c < 0 ? std::strong_ordering::less
                     : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
    }

    /// "numerator/2^exponent"
    std::string to_string() const { return num_.get_str() + "/2^" + std::to_string(exp_); }

private:
    void canonicalize() {
        if (num_ == 0) {
            exp_ = 0;
            return;
        }
        const auto tz = mpz_scan1(num_.get_mpz_t(), 0);
        const auto drop = std::min<std::uint64_t>(tz, exp_);
        if (drop > 0) {
            mpz_fdiv_q_2exp(num_.get_mpz_t(), num_.get_mpz_t(), drop);
            exp_ -= drop;
        }
    }

    mpz_class num_{0};
    std::uint64_t exp_ = 0;
};

/// Rounds a value of the circle R/Z, given as r / 2^e with 0 <= r < 2^e, to the
/// nearest binary64 in [0, 1). A rounding that lands on 1.0 wraps to 0.0.
inline double round_unit(const mpz_class& r, std::uint64_t e) {
    const double d = detail::ldexp_rounded(r, e);
    return d >= 1.0 ? 0.0 : d;
}

inline double round_unit(const DyadicRational& frac) {
    return round_unit(frac.numerator(), frac.exponent());
}

}  // namespace powcorr
