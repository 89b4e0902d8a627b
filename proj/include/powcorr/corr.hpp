#pragma once

// Correlation statistics of points on R/Z: pair and triple correlations,
// nearest-neighbour spacings, star discrepancy, and the {n alpha} control.
//
// Every pair predicate is evaluated on the sorted pair (lo <= hi) as
// d = hi - lo, inside iff d <= w or 1 - d <= w. Ties count as inside. The
// sorted counters and the brute-force oracles share this predicate, so their
// counts agree exactly.

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "powcorr/dyadic.hpp"
#include "powcorr/errors.hpp"
#include "powcorr/hpgen.hpp"
#include "powcorr/mollify.hpp"
#include "powcorr/summation.hpp"

namespace powcorr {

inline bool within_window(double lo, double hi, double w) {
    const double d = hi - lo;
    return d <= w || 1.0 - d <= w;
}

inline bool pair_within(double a, double b, double w) {
    return a <= b ? within_window(a, b, w) : within_window(b, a, w);
}

namespace detail {

inline double checked_window(const UnitSample& sample, double s) {
    if (!(s > 0)) throw DomainError("window parameter s must be positive");
    if (sample.n_max == 0) throw DomainError("empty sample");
    const double w = s / static_cast<double>(sample.n_max);
    if (!(w < 0.5)) throw DomainError("window s/N must be below 1/2");
    sample.require_resolution(w);
    return w;
}

inline std::vector<double> sorted_points(const UnitSample& sample) {
    std::vector<double> y = sample.points;
    std::sort(y.begin(), y.end());
    return y;
}

/// For sorted y, calls visit(i, a, b, c) meaning the partners j > i of i are
/// exactly [i+1, a) and [c, N) (a <= c), each index counted once.
template <class Visit>
void for_each_window(const std::vector<double>& y, double w, Visit&& visit) {
    const std::size_t n = y.size();
    std::size_t p = 0, q = 0;
    for (std::size_t i = 0; i < n; ++i) {
        p = std::max(p, i + 1);
        while (p < n && y[p] - y[i] <= w) ++p;
        q = std::max(q, i + 1);
        while (q < n && !(1.0 - (y[q] - y[i]) <= w)) ++q;
        visit(i, p, std::max(p, q));
    }
}

/// Number of unordered pairs within window w.
inline std::uint64_t window_pairs(const std::vector<double>& y, double w) {
    std::uint64_t count = 0;
    const std::size_t n = y.size();
    for_each_window(y, w, [&](std::size_t i, std::size_t a, std::size_t c) { count += (a - i - 1) + (n - c); });
    return count;
}

/// Per-point neighbour counts within w (sorted order).
inline std::vector<std::uint64_t> window_degrees(const std::vector<double>& y, double w) {
    const std::size_t n = y.size();
    std::vector<std::int64_t> diff(n + 1, 0);
    std::vector<std::uint64_t> deg(n, 0);
    for_each_window(y, w, [&](std::size_t i, std::size_t a, std::size_t c) {
        deg[i] += (a - i - 1) + (n - c);
        diff[i + 1] += 1;
        diff[a] -= 1;
        diff[c] += 1;
        diff[n] -= 1;
    });
    std::int64_t run = 0;
    for (std::size_t j = 0; j < n; ++j) {
        run += diff[j];
        deg[j] += static_cast<std::uint64_t>(run);
    }
    return deg;
}

}  // namespace detail

/// #{1 <= m != n <= N : ||x_n - x_m|| <= s/N} / N, in O(N log N).
inline double pair_corr(const UnitSample& sample, double s) {
    const double w = detail::checked_window(sample, s);
    const auto y = detail::sorted_points(sample);
    return 2.0 * static_cast<double>(detail::window_pairs(y, w)) / static_cast<double>(sample.n_max);
}

inline constexpr std::size_t kDefaultOracleCap = 20000;

/// O(N^2) reference for pair_corr.
inline double pair_corr_bruteforce(const UnitSample& sample, double s, std::size_t cap = kDefaultOracleCap) {
    const double w = detail::checked_window(sample, s);
    if (sample.n_max > cap)
        throw ResourceError("brute-force oracle capped at N=" + std::to_string(cap));
    const auto& x = sample.points;
    std::uint64_t count = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = i + 1; j < x.size(); ++j)
            if (pair_within(x[i], x[j], w)) ++count;
    return 2.0 * static_cast<double>(count) / static_cast<double>(sample.n_max);
}

/// (1/N) sum_{m != n} F(x_n - x_m).
inline double pair_corr_smoothed(const UnitSample& sample, const Mollifier& f) {
    if (f.n != sample.n_max)
        throw DomainError("mollifier built for N=" + std::to_string(f.n) + ", sample has N=" +
                          std::to_string(sample.n_max));
    const double w = f.support_end;
    if (!(w < 0.5)) throw DomainError("mollifier support must be below 1/2");
    sample.require_resolution(f.window());
    const auto y = detail::sorted_points(sample);
    const std::size_t n = y.size();
    CompensatedSum sum;
    detail::for_each_window(y, w, [&](std::size_t i, std::size_t a, std::size_t c) {
        for (std::size_t j = i + 1; j < a; ++j) sum += f(y[j] - y[i]);
        for (std::size_t j = c; j < n; ++j) sum += f(y[j] - y[i]);
    });
    return 2.0 * sum.value() / static_cast<double>(n);
}

/// (1/N) #{pairwise distinct (l, m, n) : ||x_l - x_m|| <= s1/N, ||x_m - x_n|| <= s2/N}.
/// The Poisson model predicts 4 s1 s2.
inline double triple_corr(const UnitSample& sample, double s1, double s2) {
    const double w1 = detail::checked_window(sample, s1);
    const double w2 = detail::checked_window(sample, s2);
    const auto y = detail::sorted_points(sample);
    const auto d1 = detail::window_degrees(y, w1);
    const auto d2 = w2 == w1 ? d1 : detail::window_degrees(y, w2);
    const auto d12 = detail::window_degrees(y, std::min(w1, w2));
    // Exact in 128 bits; N^3 overflows 64 bits only beyond N ~ 2.6e6.
    unsigned __int128 total = 0;
    for (std::size_t m = 0; m < y.size(); ++m)
        total += static_cast<unsigned __int128>(d1[m]) * d2[m] - d12[m];
    return static_cast<double>(total) / static_cast<double>(sample.n_max);
}

/// O(N^3) reference for triple_corr, for small N.
inline double triple_corr_bruteforce(const UnitSample& sample, double s1, double s2, std::size_t cap = 400) {
    const double w1 = detail::checked_window(sample, s1);
    const double w2 = detail::checked_window(sample, s2);
    if (sample.n_max > cap) throw ResourceError("triple brute-force capped at N=" + std::to_string(cap));
    const auto& x = sample.points;
    std::uint64_t count = 0;
    for (std::size_t m = 0; m < x.size(); ++m)
        for (std::size_t l = 0; l < x.size(); ++l) {
            if (l == m || !pair_within(x[l], x[m], w1)) continue;
            for (std::size_t k = 0; k < x.size(); ++k)
                if (k != m && k != l && pair_within(x[m], x[k], w2)) ++count;
        }
    return static_cast<double>(count) / static_cast<double>(sample.n_max);
}

struct SpacingsEcdf {
    std::vector<double> gaps;                         // sorted, scaled by N, sum N
    std::vector<std::pair<double, double>> ecdf;      // (t, F(t)) at each distinct gap
    /// sup_t |F(t) - (1 - e^-t)|.
    double ks_exponential() const {
        double sup = 0;
        const double n = static_cast<double>(gaps.size());
        for (std::size_t i = 0; i < gaps.size(); ++i) {
            const double model = 1.0 - std::exp(-gaps[i]);
            sup = std::max({sup, std::fabs(static_cast<double>(i + 1) / n - model),
                            std::fabs(static_cast<double>(i) / n - model)});
        }
        return sup;
    }
    double ecdf_at(double t) const {
        const auto it = std::upper_bound(gaps.begin(), gaps.end(), t);
        return static_cast<double>(it - gaps.begin()) / static_cast<double>(gaps.size());
    }
};

/// Circular nearest-neighbour gaps scaled by N and their ECDF.
inline SpacingsEcdf level_spacings(const UnitSample& sample) {
    if (sample.n_max < 2) throw DomainError("level spacings need N >= 2");
    const auto y = detail::sorted_points(sample);
    const std::size_t n = y.size();
    const double nd = static_cast<double>(n);
    SpacingsEcdf out;
    out.gaps.reserve(n);
    for (std::size_t i = 0; i + 1 < n; ++i) out.gaps.push_back(nd * (y[i + 1] - y[i]));
    out.gaps.push_back(nd * (1.0 - y[n - 1] + y[0]));
    std::sort(out.gaps.begin(), out.gaps.end());
    for (std::size_t i = 0; i < n; ++i) {
        if (i + 1 < n && out.gaps[i + 1] == out.gaps[i]) continue;
        out.ecdf.emplace_back(out.gaps[i], static_cast<double>(i + 1) / nd);
    }
    return out;
}

/// D*_N = max_i max(i/N - y_(i), y_(i) - (i-1)/N).
inline double star_discrepancy(const UnitSample& sample) {
    if (sample.n_max == 0) throw DomainError("star discrepancy needs N >= 1");
    const auto y = detail::sorted_points(sample);
    const double n = static_cast<double>(y.size());
    double d = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double k = static_cast<double>(i + 1);
        d = std::max({d, k / n - y[i], y[i] - (k - 1) / n});
    }
    return d;
}

/// {n alpha}, n = 1..N, accumulated exactly for a dyadic alpha.
inline UnitSample control_nalpha(const DyadicRational& alpha, std::size_t n) {
    UnitSample s;
    s.n_max = n;
    s.base = DyadicRational{0};
    s.xi = alpha;
    s.points.reserve(n);
    const std::uint64_t e = alpha.exponent();
    mpz_class acc = 0, rem;
    for (std::size_t k = 1; k <= n; ++k) {
        acc += alpha.numerator();
        mpz_fdiv_r_2exp(rem.get_mpz_t(), acc.get_mpz_t(), e);
        s.points.push_back(round_unit(rem, e));
    }
    return s;
}

inline UnitSample control_nalpha(double alpha, std::size_t n) {
    return control_nalpha(DyadicRational::from_double(alpha), n);
}

/// (sqrt 5 - 1) / 2 truncated to `bits` fractional bits.
inline DyadicRational golden_conjugate(unsigned bits = 64) {
    mpz_class five = 5, root;
    mpz_mul_2exp(five.get_mpz_t(), five.get_mpz_t(), 2 * static_cast<mp_bitcnt_t>(bits) + 2);
    mpz_sqrt(root.get_mpz_t(), five.get_mpz_t());  // floor(sqrt5 * 2^(bits+1))
    mpz_class one;
    mpz_ui_pow_ui(one.get_mpz_t(), 2, bits + 1);
    mpz_class num = root - one;  // (sqrt5 - 1) * 2^(bits+1), truncated
    return {num, static_cast<std::uint64_t>(bits) + 2};
}

/// I.i.d. uniform points (53-bit grid), the Poisson reference.
inline UnitSample uniform_sample(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<double> pts(n);
    for (auto& p : pts) p = std::ldexp(static_cast<double>(rng() >> 11), -53);
    return UnitSample::from_points(std::move(pts));
}

}  // namespace powcorr
