#pragma once

// Fractional parts {xi * x^n}, n = 1..N, for dyadic x > 1 and xi != 0.
//
// Two routes: an exact big-integer oracle, and a fixed-point ladder whose
// fractional precision shrinks as n grows (rounding at step n is amplified by
// x^(N-n), so precision is shed exactly as fast as amplification decays).

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "powcorr/dyadic.hpp"
#include "powcorr/errors.hpp"

namespace powcorr {

/// Binary64 rounding of a value in [0,1) (circle metric, 1.0 wraps to 0.0).
inline constexpr double kStorageBound = 0x1p-53;

struct UnitSample {
    std::size_t n_max = 0;
    std::vector<double> points;  // points[n-1] ~ {xi * x^n}
    /// Certified bound, in the circle metric, on the high-precision fractional
    /// parts the points were rounded from. Zero for the exact oracle.
    double err_bound = 0.0;
    /// Extra error from storing points as binary64.
    double storage_bound = kStorageBound;
    DyadicRational base;
    DyadicRational xi{1};
    int guard_bits = 0;

    double total_error() const { return err_bound + storage_bound; }

    /// Points supplied directly (test data, controls); they are their own truth.
    static UnitSample from_points(std::vector<double> pts) {
        for (double p : pts)
            if (!(p >= 0.0 && p < 1.0)) throw DomainError("unit sample point outside [0,1)");
        UnitSample s;
        s.n_max = pts.size();
        s.points = std::move(pts);
        s.storage_bound = 0.0;
        s.xi = DyadicRational{0};
        return s;
    }

    /// Prefix sample of the first n points; error bounds carry over.
    UnitSample prefix(std::size_t n) const {
        if (n > n_max) throw DomainError("prefix longer than sample");
        UnitSample s = *this;
        s.points.resize(n);
        s.n_max = n;
        return s;
    }

    /// Gate for statistics at window half-width `window`: certified error must
    /// be below window / 100.
    void require_resolution(double window) const {
        if (total_error() < window / 100.0) return;
        const double factor = guard_bits > 0 ? err_bound * std::ldexp(1.0, guard_bits) : 1.0;
        const int need = static_cast<int>(std::ceil(std::log2(factor * 100.0 / window))) + 1;
        throw PrecisionError("certified error " + std::to_string(total_error()) +
                                 " too large for window " + std::to_string(window) +
                                 "; guard bits required: " + std::to_string(need),
                             need);
    }
};

namespace detail {

inline double log2_of(const DyadicRational& x) {
    // log1p keeps relative accuracy for x close to 1.
    const double xm1 = (x - DyadicRational{1}).to_double();
    return std::log1p(xm1) / std::log(2.0);
}

inline void require_base(const DyadicRational& x, const DyadicRational& xi) {
    if (x <= DyadicRational{1}) throw DomainError("base x must exceed 1, got " + x.to_string());
    if (xi.sign() == 0) throw DomainError("xi must be nonzero");
}

}  // namespace detail

/// Default guard bits: 64 + ceil(log2 N).
inline int default_guard_bits(std::size_t n) {
    return 64 + static_cast<int>(std::ceil(std::log2(static_cast<double>(std::max<std::size_t>(n, 1)))));
}

/// Fractional-bit schedule F_n = ceil((N - n) log2 x) + g of the ladder.
class PrecisionBudget {
public:
    PrecisionBudget(const DyadicRational& x, std::size_t n, int guard_bits)
        : n_(n), guard_(guard_bits), log2x_(detail::log2_of(x)) {
        // Inflated by a relative 1e-13 so the ceiling never undershoots the
        // exact (N - n) log2 x.
        const auto top = static_cast<std::uint64_t>(std::ceil(static_cast<double>(n) * log2x_ * (1 + 1e-13)));
        total_bits_ = top + static_cast<std::uint64_t>(guard_bits) + 2;
    }

    std::uint64_t frac_bits(std::size_t step) const {
        const double v = static_cast<double>(n_ - step) * log2x_ * (1 + 1e-13);
        return static_cast<std::uint64_t>(std::ceil(v)) + static_cast<std::uint64_t>(guard_);
    }

    int guard_bits() const { return guard_; }
    std::size_t count() const { return n_; }
    double log2_base() const { return log2x_; }
    /// Operand width bound: max_n (ceil(n log2 x) + F_n) plus rounding slack.
    std::uint64_t total_bits() const { return total_bits_; }

private:
    std::size_t n_;
    int guard_;
    double log2x_;
    std::uint64_t total_bits_ = 0;
};

/// x = A + draw / 2^mantissa_bits. The seeded sampler below feeds it a uniform draw.
inline DyadicRational sample_x_from_draw(const DyadicRational& a, int mantissa_bits, const mpz_class& draw) {
    if (a <= DyadicRational{1}) throw DomainError("A must exceed 1, got " + a.to_string());
    if (mantissa_bits < 1) throw DomainError("mantissa_bits must be positive");
    if (draw < 0 || (draw != 0 && mpz_sizeinbase(draw.get_mpz_t(), 2) > static_cast<std::size_t>(mantissa_bits)))
        throw DomainError("draw does not fit in mantissa bits");
    return a + DyadicRational{draw, static_cast<std::uint64_t>(mantissa_bits)};
}

/// Draws x = A + u, u a uniform dyadic with `mantissa_bits` random bits.
inline DyadicRational sample_x(const DyadicRational& a, int mantissa_bits, std::uint64_t seed) {
    if (a <= DyadicRational{1}) throw DomainError("A must exceed 1, got " + a.to_string());
    if (mantissa_bits < 8) throw DomainError("mantissa_bits must be at least 8");
    std::mt19937_64 rng(seed);
    mpz_class draw = 0;
    int remaining = mantissa_bits;
    while (remaining > 0) {
        const int take = std::min(remaining, 64);
        std::uint64_t word = rng();
        if (take < 64) word &= (std::uint64_t{1} << take) - 1;
        mpz_class w;
        mpz_import(w.get_mpz_t(), 1, -1, sizeof word, 0, 0, &word);
        draw <<= take;
        draw += w;
        remaining -= take;
    }
    return sample_x_from_draw(a, mantissa_bits, draw);
}

inline DyadicRational sample_x(double a, int mantissa_bits, std::uint64_t seed) {
    if (!(a > 1.0)) throw DomainError("A must exceed 1");
    return sample_x(DyadicRational::from_double(a), mantissa_bits, seed);
}

/// Bits needed to resolve {x^n}, n <= N, to absolute accuracy eps.
inline std::uint64_t required_bits(const DyadicRational& x, std::size_t n, double eps, int margin = 8) {
    if (n == 0) throw DomainError("required_bits needs N >= 1");
    if (!(eps > 0)) throw DomainError("required_bits needs eps > 0");
    if (x <= DyadicRational{1}) throw DomainError("base x must exceed 1");
    const double whole = std::ceil(static_cast<double>(n) * detail::log2_of(x) * (1 + 1e-13));
    const double tail = std::ceil(std::log2(static_cast<double>(n) / eps));
    return static_cast<std::uint64_t>(whole + std::max(tail, 0.0)) + static_cast<std::uint64_t>(margin);
}

/// Upper limit on intermediate integer size for the exact oracle, in bits.
inline constexpr std::uint64_t kDefaultOracleBits = std::uint64_t{1} << 30;

/// Exact fractional parts {xi x^n}, n = 1..N, as dyadic rationals.
inline std::vector<DyadicRational> exact_fractions(const DyadicRational& x, const DyadicRational& xi,
                                                   std::size_t n, std::uint64_t max_bits = kDefaultOracleBits) {
    detail::require_base(x, xi);
    if (n == 0) throw DomainError("N must be at least 1");
    const std::uint64_t per_step = mpz_sizeinbase(x.numerator().get_mpz_t(), 2);
    const std::uint64_t need = per_step * n + mpz_sizeinbase(xi.numerator().get_mpz_t(), 2);
    if (need > max_bits)
        throw ResourceError("exact oracle needs " + std::to_string(need) + " bits, budget " +
                            std::to_string(max_bits));
    std::vector<DyadicRational> out;
    out.reserve(n);
    mpz_class power = xi.numerator();
    mpz_class rem;
    for (std::size_t k = 1; k <= n; ++k) {
        power *= x.numerator();
        const std::uint64_t e = xi.exponent() + k * x.exponent();
        mpz_fdiv_r_2exp(rem.get_mpz_t(), power.get_mpz_t(), e);
        out.emplace_back(rem, e);
    }
    return out;
}

inline UnitSample exact_frac_powers(const DyadicRational& x, const DyadicRational& xi, std::size_t n,
                                    std::uint64_t max_bits = kDefaultOracleBits) {
    const auto fracs = exact_fractions(x, xi, n, max_bits);
    UnitSample s;
    s.n_max = n;
    s.points.reserve(n);
    for (const auto& f : fracs) s.points.push_back(round_unit(f));
    s.err_bound = 0.0;
    s.base = x;
    s.xi = xi;
    return s;
}

/// Certified ladder error: 2^-g * max(N x/(x-1), N+1), rounded upward.
inline double ladder_error_bound(const DyadicRational& x, std::size_t n, int guard_bits) {
    const double xd = x.to_double();
    const double xm1 = (x - DyadicRational{1}).to_double();
    const double nd = static_cast<double>(n);
    const double factor = std::max(nd * xd / xm1, nd + 1.0);
    return std::ldexp(factor, -guard_bits) * (1.0 + 1e-12);
}

/// Runs the fixed-point ladder and hands each step to `visit(n, Y, F)`, where
/// Y / 2^F approximates xi x^n from below with the certified error bound.
template <class Visitor>
void ladder_walk(const DyadicRational& x, const DyadicRational& xi, std::size_t n, int guard_bits, Visitor&& visit) {
    detail::require_base(x, xi);
    if (n == 0) throw DomainError("N must be at least 1");
    if (guard_bits < 32) throw DomainError("guard bits must be at least 32");
    const PrecisionBudget budget(x, n, guard_bits);
    std::uint64_t f_prev = budget.frac_bits(0);
    mpz_class y;
    if (xi.exponent() <= f_prev) {
        y = xi.scaled_numerator(f_prev);
    } else {
        mpz_fdiv_q_2exp(y.get_mpz_t(), xi.numerator().get_mpz_t(), xi.exponent() - f_prev);
    }
    const mpz_class& a = x.numerator();
    const std::uint64_t b = x.exponent();
    for (std::size_t k = 1; k <= n; ++k) {
        const std::uint64_t f = budget.frac_bits(k);
        y *= a;
        const std::uint64_t shift = f_prev + b - f;
        if (shift > 0) mpz_fdiv_q_2exp(y.get_mpz_t(), y.get_mpz_t(), shift);
        visit(k, static_cast<const mpz_class&>(y), f);
        f_prev = f;
    }
}

/// Ladder fractional parts as exact dyadics (what the binary64 points round from).
struct LadderFractions {
    std::vector<DyadicRational> fracs;
    double err_bound = 0.0;
};

inline LadderFractions ladder_fractions(const DyadicRational& x, const DyadicRational& xi, std::size_t n,
                                        int guard_bits) {
    LadderFractions out;
    out.fracs.reserve(n);
    mpz_class rem;
    ladder_walk(x, xi, n, guard_bits, [&](std::size_t, const mpz_class& y, std::uint64_t f) {
        mpz_fdiv_r_2exp(rem.get_mpz_t(), y.get_mpz_t(), f);
        out.fracs.emplace_back(rem, f);
    });
    out.err_bound = ladder_error_bound(x, n, guard_bits);
    return out;
}

/// Fast path. With `resolution` set, throws PrecisionError unless the certified
/// error is below resolution / 100.
inline UnitSample ladder_frac_powers(const DyadicRational& x, const DyadicRational& xi, std::size_t n,
                                     int guard_bits, std::optional<double> resolution = std::nullopt) {
    detail::require_base(x, xi);
    if (guard_bits < 32) throw DomainError("guard bits must be at least 32");
    UnitSample s;
    s.n_max = n;
    s.base = x;
    s.xi = xi;
    s.guard_bits = guard_bits;
    s.err_bound = ladder_error_bound(x, n, guard_bits);
    if (resolution) s.require_resolution(*resolution);
    s.points.reserve(n);
    mpz_class rem;
    ladder_walk(x, xi, n, guard_bits, [&](std::size_t, const mpz_class& y, std::uint64_t f) {
        mpz_fdiv_r_2exp(rem.get_mpz_t(), y.get_mpz_t(), f);
        s.points.push_back(round_unit(rem, f));
    });
    return s;
}

/// Distance in R/Z between two exact dyadics.
inline DyadicRational circle_distance(const DyadicRational& a, const DyadicRational& b) {
    const DyadicRational d = (a - b).frac();
    const DyadicRational other = DyadicRational{1} - d;
    return d < other ? d : other;
}

// ---------------------------------------------------------------------------
// Text column format: one header line, then one point per line.

inline void write_sample(std::ostream& os, const UnitSample& s) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", s.err_bound);
    os << "# powcorr-sample x=" << s.base.to_string() << " xi=" << s.xi.to_string() << " N=" << s.n_max
       << " g=" << s.guard_bits << " err_bound=" << buf << '\n';
    for (double p : s.points) {
        std::snprintf(buf, sizeof buf, "%.17g", p);
        os << buf << '\n';
    }
}

inline UnitSample read_sample(std::istream& is) {
    std::string header;
    if (!std::getline(is, header) || header.rfind("# powcorr-sample", 0) != 0)
        throw DomainError("missing powcorr-sample header");
    UnitSample s;
    std::istringstream hs(header.substr(16));
    std::string field;
    while (hs >> field) {
        const auto eq = field.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = field.substr(0, eq), val = field.substr(eq + 1);
        if (key == "x") s.base = DyadicRational::parse(val);
        else if (key == "xi") s.xi = DyadicRational::parse(val);
        else if (key == "N") s.n_max = std::stoull(val);
        else if (key == "g") s.guard_bits = std::stoi(val);
        else if (key == "err_bound") s.err_bound = std::stod(val);
    }
    s.points.reserve(s.n_max);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        try {
            s.points.push_back(std::stod(line));
        } catch (const std::exception&) {
            throw DomainError("malformed sample line: " + line);
        }
    }
    if (s.points.size() != s.n_max) throw DomainError("sample length does not match header N");
    return s;
}

}  // namespace powcorr
