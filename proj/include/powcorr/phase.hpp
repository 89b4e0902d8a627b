#pragma once

// Exact evaluation of f(x) = x^n - x^m (or x^n) at binary64 points, and
// certified root location for increasing f: the least double x with
// f(x) >= target, decided by exact dyadic comparisons.

#include <gmpxx.h>

#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>

#include "powcorr/dyadic.hpp"
#include "powcorr/errors.hpp"

namespace powcorr {

class PowerPhase {
public:
    /// x^n - x^m with n > m >= 1.
    static PowerPhase difference(unsigned n, unsigned m) {
        if (!(n > m && m >= 1)) throw DomainError("power difference needs n > m >= 1");
        return PowerPhase(n, m, false);
    }
    /// x^n.
    static PowerPhase single(unsigned n) {
        if (n < 1) throw DomainError("power needs n >= 1");
        return PowerPhase(n, 0, true);
    }

    unsigned n() const { return n_; }
    unsigned m() const { return m_; }
    bool is_single() const { return single_; }

    DyadicRational exact(double x) const { return exact(DyadicRational::from_double(x)); }

    DyadicRational exact(const DyadicRational& x) const {
        const mpz_class& a = x.numerator();
        const std::uint64_t e = x.exponent();
        mpz_class hi;
        mpz_pow_ui(hi.get_mpz_t(), a.get_mpz_t(), n_);
        if (single_) return {hi, e * n_};
        mpz_class lo;
        mpz_pow_ui(lo.get_mpz_t(), a.get_mpz_t(), m_);
        mpz_mul_2exp(lo.get_mpz_t(), lo.get_mpz_t(), e * (n_ - m_));
        return {hi - lo, e * n_};
    }

    /// f(x) - shift rounded to binary64, exact before the rounding.
    double offset(double x, const DyadicRational& shift) const { return (exact(x) - shift).to_double(); }

    long double approx(long double x) const {
        const long double v = std::pow(x, static_cast<long double>(n_));
        return single_ ? v : v - std::pow(x, static_cast<long double>(m_));
    }
    long double deriv(long double x) const {
        const long double v = n_ * std::pow(x, static_cast<long double>(n_) - 1);
        return single_ ? v : v - m_ * std::pow(x, static_cast<long double>(m_) - 1);
    }
    long double second_deriv(long double x) const {
        const long double v = n_ < 2 ? 0.0L : static_cast<long double>(n_) * (n_ - 1) * std::pow(x, static_cast<long double>(n_) - 2);
        if (single_ || m_ < 2) return v;
        return v - static_cast<long double>(m_) * (m_ - 1) * std::pow(x, static_cast<long double>(m_) - 2);
    }

private:
    PowerPhase(unsigned n, unsigned m, bool single) : n_(n), m_(m), single_(single) {}
    unsigned n_;
    unsigned m_;
    bool single_;
};

namespace detail {

inline std::uint64_t bits_of(double x) { return std::bit_cast<std::uint64_t>(x); }
inline double double_of(std::uint64_t b) { return std::bit_cast<double>(b); }

}  // namespace detail

/// Least binary64 x in [lo, hi] with f(x) >= target, for f increasing on
/// [lo, hi] and 0 < lo <= hi. Returns hi when f(hi) < target.
inline double solve_at_least(const PowerPhase& f, const DyadicRational& target, double lo, double hi) {
    if (!(lo > 0 && lo <= hi)) throw DomainError("root bracket must satisfy 0 < lo <= hi");
    if (f.exact(lo) >= target) return lo;
    if (f.exact(hi) < target) return hi;
    // Invariant: f(double_of(a)) < target <= f(double_of(b)); positive doubles
    // order like their bit patterns.
    std::uint64_t a = detail::bits_of(lo), b = detail::bits_of(hi);

    // Safeguarded Newton in extended precision narrows the bracket first.
    const long double t = static_cast<long double>(target.to_double());
    long double x = 0.5L * (static_cast<long double>(lo) + hi);
    for (int it = 0; it < 40; ++it) {
        const long double d = f.deriv(x);
        if (!(d > 0)) break;
        long double nx = x - (f.approx(x) - t) / d;
        if (!(nx > lo)) nx = 0.5L * (x + lo);
        if (!(nx < hi)) nx = 0.5L * (x + hi);
        if (std::fabs(nx - x) <= std::fabs(x) * 1e-19L) {
            x = nx;
            break;
        }
        x = nx;
    }
    const std::uint64_t guess = detail::bits_of(static_cast<double>(x));
    for (std::uint64_t radius : {std::uint64_t{1} << 8, std::uint64_t{1} << 20}) {
        const std::uint64_t ga = guess > a + radius ? guess - radius : a;
        const std::uint64_t gb = guess + radius < b ? guess + radius : b;
        if (ga < gb && f.exact(detail::double_of(ga)) < target && f.exact(detail::double_of(gb)) >= target) {
            a = ga;
            b = gb;
            break;
        }
    }
    while (b - a > 1) {
        const std::uint64_t mid = a + (b - a) / 2;
        if (f.exact(detail::double_of(mid)) >= target) b = mid;
        else a = mid;
    }
    return detail::double_of(b);
}

}  // namespace powcorr
