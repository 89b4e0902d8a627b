#pragma once

// Blocks Delta_k = {(k-1)K+1, ..., kK} of {1, ..., N} with N = K^10, and the
// block sums Y_k = sum_{n in Delta_k} sum_{m<n} G(x^n - x^m).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "powcorr/corr.hpp"
#include "powcorr/errors.hpp"
#include "powcorr/hpgen.hpp"
#include "powcorr/mollify.hpp"
#include "powcorr/phase.hpp"
#include "powcorr/summation.hpp"

namespace powcorr {

struct BlockScheme {
    std::size_t n = 0;          // N = K^10
    std::size_t block_len = 0;  // K
    std::size_t count = 0;      // K^9 blocks

    std::size_t first(std::size_t k) const { return (k - 1) * block_len + 1; }
    std::size_t last(std::size_t k) const { return k * block_len; }

    /// Number of (n, m) pairs with n in Delta_k and 1 <= m < n.
    std::uint64_t term_count(std::size_t k) const {
        const std::uint64_t a = first(k), b = last(k);
        return (a + b - 2) * (b - a + 1) / 2;
    }

    std::size_t block_of(std::size_t index) const { return (index - 1) / block_len + 1; }

    void require_block(std::size_t k) const {
        if (k < 1 || k > count)
            throw DomainError("block index " + std::to_string(k) + " outside 1.." + std::to_string(count));
    }
};

namespace detail {

inline std::uint64_t pow10_of(std::uint64_t k) {
    std::uint64_t r = 1;
    for (int i = 0; i < 10; ++i) r *= k;
    return r;
}

}  // namespace detail

inline BlockScheme blocks(std::size_t n) {
    // 7^10 already exceeds 2.8e8; anything larger is out of desk range anyway.
    for (std::uint64_t k = 2; k <= 80; ++k) {
        const std::uint64_t p = detail::pow10_of(k);
        if (p == n) return {n, static_cast<std::size_t>(k), static_cast<std::size_t>(p / k)};
        if (p > n) {
            const std::uint64_t below = k > 2 ? detail::pow10_of(k - 1) : p;
            const std::uint64_t nearest = (k > 2 && n - below <= p - n) ? below : p;
            throw DomainError("N = " + std::to_string(n) + " is not a 10th power K^10 with K >= 2; nearest valid N is " +
                              std::to_string(nearest));
        }
    }
    throw DomainError("N = " + std::to_string(n) + " is too large for a block scheme");
}

/// Y_k straight from the definition over the stored points.
inline double block_sum_Y(const UnitSample& sample, std::size_t k, const BlockScheme& scheme,
                          const CenteredMollifier& g) {
    scheme.require_block(k);
    if (sample.n_max < scheme.last(k))
        throw DomainError("sample has " + std::to_string(sample.n_max) + " points, block needs " +
                          std::to_string(scheme.last(k)));
    sample.require_resolution(g.base.window());
    CompensatedSum sum;
    for (std::size_t n = scheme.first(k); n <= scheme.last(k); ++n)
        for (std::size_t m = 1; m < n; ++m) sum += g(sample.points[n - 1] - sample.points[m - 1]);
    return sum.value();
}

/// All Y_k at once. Only pairs inside the support of F contribute beyond the
/// constant -mean, so close pairs are enumerated from the sorted points.
inline std::vector<double> block_sums(const UnitSample& sample, const BlockScheme& scheme, const CenteredMollifier& g) {
    if (sample.n_max < scheme.n)
        throw DomainError("sample shorter than block scheme N = " + std::to_string(scheme.n));
    const Mollifier& f = g.base;
    std::vector<CompensatedSum> acc(scheme.count);
    if (f.height != 0.0 && f.support_end > 0.0) {
        if (!(f.support_end < 0.5)) throw DomainError("mollifier support must be below 1/2");
        sample.require_resolution(f.window());
        const std::size_t n = scheme.n;
        std::vector<std::uint32_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<std::uint32_t>(i);
        const auto& pts = sample.points;
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return pts[a] < pts[b] || (pts[a] == pts[b] && a < b); });
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) y[i] = pts[order[i]];
        detail::for_each_window(y, f.support_end, [&](std::size_t i, std::size_t a, std::size_t c) {
            const auto visit = [&](std::size_t j) {
                const double v = f(y[j] - y[i]);
                if (v == 0.0) return;
                const std::size_t hi = std::max(order[i], order[j]) + 1;
                acc[scheme.block_of(hi) - 1] += v;
            };
            for (std::size_t j = i + 1; j < a; ++j) visit(j);
            for (std::size_t j = c; j < n; ++j) visit(j);
        });
    }
    std::vector<double> out(scheme.count);
    for (std::size_t k = 1; k <= scheme.count; ++k)
        out[k - 1] = acc[k - 1].value() - g.mean * static_cast<double>(scheme.term_count(k));
    return out;
}

enum class Parity { odd, even };

inline const char* to_string(Parity p) { return p == Parity::odd ? "odd" : "even"; }

inline double parity_sum(const std::vector<double>& y, Parity p) {
    CompensatedSum sum;
    for (std::size_t k = (p == Parity::odd ? 1 : 2); k <= y.size(); k += 2) sum += y[k - 1];
    return sum.value();
}

/// Ordered double sum of G over m != n, straight from the definition.
inline double ordered_pair_sum(const UnitSample& sample, const CenteredMollifier& g) {
    CompensatedSum sum;
    const auto& p = sample.points;
    for (std::size_t n = 0; n < p.size(); ++n)
        for (std::size_t m = 0; m < p.size(); ++m)
            if (m != n) sum += g(p[n] - p[m]);
    return sum.value();
}

struct ParityIdentity {
    double lhs = 0.0;   // ordered sum over m != n
    double odd = 0.0;
    double even = 0.0;
    double rhs() const { return 2.0 * (odd + even); }
    double rel_error() const { return std::fabs(lhs - rhs()) / std::max(1.0, std::fabs(lhs)); }
};

inline ParityIdentity parity_identity(const UnitSample& sample, const BlockScheme& scheme, const CenteredMollifier& g) {
    const auto y = block_sums(sample, scheme, g);
    return {ordered_pair_sum(sample.prefix(scheme.n), g), parity_sum(y, Parity::odd), parity_sum(y, Parity::even)};
}

/// Y_k at an exact point x, with every fractional part computed exactly.
inline double block_sum_at(const DyadicRational& x, std::size_t k, const BlockScheme& scheme,
                           const CenteredMollifier& g) {
    scheme.require_block(k);
    if (x <= DyadicRational{1}) throw DomainError("block sum needs x > 1");
    std::vector<DyadicRational> pw(scheme.last(k) + 1);
    pw[1] = x;
    for (std::size_t i = 2; i <= scheme.last(k); ++i) pw[i] = pw[i - 1] * x;
    CompensatedSum sum;
    for (std::size_t n = scheme.first(k); n <= scheme.last(k); ++n)
        for (std::size_t m = 1; m < n; ++m) {
            const DyadicRational d = (pw[n] - pw[m]).frac();
            sum += g(round_unit(d));
        }
    return sum.value();
}

}  // namespace powcorr
