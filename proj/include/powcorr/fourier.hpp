#pragma once

// Fourier analysis of the centered mollifier G: closed-form coefficients,
// truncation sup-error, the log L / L envelope trend, and the Dirichlet kernel.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "powcorr/errors.hpp"
#include "powcorr/mollify.hpp"

namespace powcorr {

namespace detail {

/// int_0^1 tau (1 - tau) sin(a + b tau) d tau.
inline double ramp_sine_moment(double a, double b) {
    if (std::fabs(b) < 1.0) {
        // sin(a) * int q cos(b tau) + cos(a) * int q sin(b tau), with
        // int_0^1 tau(1-tau) tau^k = 1 / ((k+2)(k+3)).
        double cos_part = 0, sin_part = 0, term = 1.0;  // b^k / k!
        for (int k = 0; k < 40; ++k) {
            const double moment = 1.0 / ((k + 2.0) * (k + 3.0));
            const double contrib = term * moment;
            switch (k % 4) {
            case 0: cos_part += contrib; break;
            case 1: sin_part += contrib; break;
            case 2: cos_part -= contrib; break;
            default: sin_part -= contrib; break;
            }
            term *= b / (k + 1.0);
            if (std::fabs(term) < 1e-30) break;
        }
        return std::sin(a) * cos_part + std::cos(a) * sin_part;
    }
    const double b2 = b * b;
    return -(std::sin(a + b) + std::sin(a)) / b2 + 2.0 * (std::cos(a) - std::cos(a + b)) / (b2 * b);
}

}  // namespace detail

/// c_l = int_0^1 G(t) e^{-2 pi i l t} dt in closed form (real, G even).
inline double fourier_coefficient(const CenteredMollifier& g, long l) {
    if (l == 0) return 0.0;
    const Mollifier& f = g.base;
    if (f.height == 0.0) return 0.0;
    const double omega = 2.0 * std::numbers::pi * static_cast<double>(std::labs(l));
    // Integration by parts folds the plateau into the ramp:
    // c_l = (12 / omega) int_0^1 tau(1-tau) sin(omega (p + delta tau)) d tau.
    return f.height * 12.0 / omega * detail::ramp_sine_moment(omega * f.plateau, omega * f.delta);
}

struct FourierTruncation {
    std::size_t cutoff = 0;
    std::vector<double> coeffs;  // coeffs[l] = c_l = c_{-l}, l = 0..L
    CenteredMollifier source;

    double coefficient(long l) const {
        const auto k = static_cast<std::size_t>(std::labs(l));
        return k < coeffs.size() ? coeffs[k] : 0.0;
    }

    /// P(t) = sum_{|l| <= L} c_l e^{2 pi i l t} via Clenshaw on cos(l theta).
    double partial_sum(double t) const {
        const double theta = 2.0 * std::numbers::pi * t;
        const double c = std::cos(theta);
        double b1 = 0, b2 = 0;
        for (std::size_t l = cutoff; l >= 1; --l) {
            const double b0 = 2.0 * coeffs[l] + 2.0 * c * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        // sum_{l>=1} a_l cos(l theta) = b1 cos(theta) - b2 with a_l = 2 c_l.
        return coeffs[0] + b1 * c - b2;
    }

    double parseval_sum() const {
        double sum = coeffs.empty() ? 0.0 : coeffs[0] * coeffs[0];
        for (std::size_t l = 1; l < coeffs.size(); ++l) sum += 2.0 * coeffs[l] * coeffs[l];
        return sum;
    }

    void write_table(std::ostream& os) const {
        os.precision(17);
        for (std::size_t l = 0; l <= cutoff; ++l) os << l << ' ' << coeffs[l] << '\n';
    }
};

inline FourierTruncation coefficients(const CenteredMollifier& g, std::size_t cutoff) {
    if (cutoff < 1) throw DomainError("Fourier cutoff must be at least 1");
    FourierTruncation ft;
    ft.cutoff = cutoff;
    ft.source = g;
    ft.coeffs.resize(cutoff + 1);
    ft.coeffs[0] = 0.0;
    for (std::size_t l = 1; l <= cutoff; ++l) ft.coeffs[l] = fourier_coefficient(g, static_cast<long>(l));
    return ft;
}

/// int_0^1 G^2, closed form over the plateau and ramps.
inline double centered_l2_squared(const CenteredMollifier& g) {
    const Mollifier& f = g.base;
    // int F^2 = h^2 (2p + 2 delta int_0^1 (1 - psi)^2) and int (1-psi)^2 = 13/35.
    const double f2 = f.height * f.height * (2.0 * std::max(f.plateau, 0.0) + 2.0 * f.delta * 13.0 / 35.0);
    return f2 - g.mean * g.mean;
}

struct TruncationSup {
    double sup = 0.0;
    std::size_t grid_size = 0;
    double argmax = 0.0;
};

/// P_L on the uniform grid t_k = k / (2 G), k = 0..G, via one DCT-I.
inline std::vector<double> partial_sum_grid(const FourierTruncation& ft, std::size_t grid_size) {
    if (grid_size <= ft.cutoff) throw DomainError("grid must be finer than the cutoff");
    const std::size_t n = grid_size + 1;
    std::vector<double> in(n, 0.0), out(n, 0.0);
    for (std::size_t l = 0; l <= ft.cutoff; ++l) in[l] = ft.coeffs[l];
    // REDFT00: Y_k = X_0 + (-1)^k X_G + 2 sum_{l=1}^{G-1} X_l cos(pi l k / G).
    fftw_plan plan = fftw_plan_r2r_1d(static_cast<int>(n), in.data(), out.data(), FFTW_REDFT00, FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
    return out;
}

/// Direct sum in extended precision, for isolated off-grid points.
inline double partial_sum_direct(const FourierTruncation& ft, double t) {
    long double sum = ft.coeffs[0];
    const long double theta = 2.0L * std::numbers::pi_v<long double> * t;
    for (std::size_t l = 1; l <= ft.cutoff; ++l)
        sum += 2.0L * ft.coeffs[l] * std::cos(theta * static_cast<long double>(l));
    return static_cast<double>(sum);
}

/// sup_t |G(t) - P_L(t)| over a uniform grid of [0, 1/2] with `grid_size`
/// intervals (G and P are even), plus the ramp breakpoints and midpoints.
inline TruncationSup truncation_sup(const CenteredMollifier& g, std::size_t cutoff, std::size_t grid_size) {
    if (grid_size == 0) throw DomainError("grid_size must be positive");
    if (cutoff > 0 && grid_size < 8 * cutoff) throw DomainError("grid_size must be at least 8 L");
    TruncationSup out;
    const auto consider = [&](double t, double p) {
        const double e = std::fabs(g(t) - p);
        if (e > out.sup) {
            out.sup = e;
            out.argmax = t;
        }
    };
    const Mollifier& f = g.base;
    std::vector<double> extra;
    for (double u : {f.plateau, f.support_end, f.plateau + 0.5 * f.delta})
        if (u >= 0 && u <= 0.5) extra.push_back(u);
    out.grid_size = grid_size + 1 + extra.size();
    if (cutoff == 0) {
        for (std::size_t k = 0; k <= grid_size; ++k) consider(0.5 * static_cast<double>(k) / grid_size, 0.0);
        for (double u : extra) consider(u, 0.0);
        return out;
    }
    const FourierTruncation ft = coefficients(g, cutoff);
    const auto grid = partial_sum_grid(ft, grid_size);
    for (std::size_t k = 0; k <= grid_size; ++k) consider(0.5 * static_cast<double>(k) / grid_size, grid[k]);
    for (double u : extra) consider(u, partial_sum_direct(ft, u));
    return out;
}

enum class CutoffRule { cube, constant };

struct JacksonPoint {
    std::size_t n = 0;
    std::size_t cutoff = 0;
    double sup = 0.0;
    double envelope = 0.0;  // N^2 log L / L
};

struct JacksonTrend {
    std::vector<JacksonPoint> points;
    double slope = 0.0;
    double intercept = 0.0;
    std::vector<double> residuals;
    double slope_limit = 1.15;
    bool non_decreasing = false;  // sup failed to decay along the N list
    bool pass() const { return slope <= slope_limit && !non_decreasing; }
    /// max sup / envelope (the realized constant of the upper envelope).
    double envelope_constant() const {
        double c = 0;
        for (const auto& p : points) c = std::max(c, p.sup / p.envelope);
        return c;
    }
};

inline std::size_t apply_cutoff(CutoffRule rule, std::size_t n, std::size_t constant) {
    return rule == CutoffRule::cube ? n * n * n : constant;
}

/// Least-squares fit of log sup against log(N^2 log L / L) across N_list.
inline JacksonTrend jackson_trend(double s, const std::vector<std::size_t>& n_list, CutoffRule rule,
                                  std::size_t constant_cutoff = 64) {
    if (n_list.size() < 3) throw DomainError("jackson_trend needs at least 3 values of N");
    for (std::size_t i = 1; i < n_list.size(); ++i)
        if (n_list[i] <= n_list[i - 1]) throw DomainError("jackson_trend needs an increasing N list");
    JacksonTrend tr;
    std::vector<double> xs, ys;
    for (std::size_t n : n_list) {
        const std::size_t cutoff = apply_cutoff(rule, n, constant_cutoff);
        const auto g = centered(make_outer(s, n));
        const auto sup = truncation_sup(g, cutoff, 8 * cutoff);
        const double nd = static_cast<double>(n), ld = static_cast<double>(cutoff);
        JacksonPoint pt{n, cutoff, sup.sup, nd * nd * std::log(ld) / ld};
        tr.points.push_back(pt);
        if (pt.sup > 0 && pt.envelope > 0) {
            xs.push_back(std::log(pt.envelope));
            ys.push_back(std::log(pt.sup));
        }
    }
    for (std::size_t i = 1; i < tr.points.size(); ++i)
        if (tr.points[i].sup >= tr.points[i - 1].sup) tr.non_decreasing = true;
    if (xs.size() < 3) throw DomainError("degenerate Jackson fit: fewer than 3 usable points");
    const double k = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i] / k;
        my += ys[i] / k;
    }
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx == 0) throw DomainError("degenerate Jackson fit: envelope constant across N");
    tr.slope = sxy / sxx;
    tr.intercept = my - tr.slope * mx;
    for (std::size_t i = 0; i < xs.size(); ++i) tr.residuals.push_back(ys[i] - (tr.intercept + tr.slope * xs[i]));
    return tr;
}

/// sin(2 pi (M + 1/2) t) / sin(pi t), with the value 2M + 1 at integers.
inline double dirichlet_kernel(std::size_t order, double t) {
    const double r = t - std::nearbyint(t);
    if (r == 0.0) return 2.0 * static_cast<double>(order) + 1.0;
    const double m = static_cast<double>(order) + 0.5;
    return std::sin(2.0 * std::numbers::pi * m * r) / std::sin(std::numbers::pi * r);
}

}  // namespace powcorr
