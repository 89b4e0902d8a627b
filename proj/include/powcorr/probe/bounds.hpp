#pragma once

// Oscillatory-integral and preimage-measure probes: the van der Corput bound
// for phi_l(x) = l (x^n - x^m), preimages of integer windows under convex
// powers, and the overlap integral of two mollified phases.

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "powcorr/dyadic.hpp"
#include "powcorr/errors.hpp"
#include "powcorr/mollify.hpp"
#include "powcorr/phase.hpp"
#include "powcorr/probe/integrals.hpp"
#include "powcorr/probe/report.hpp"
#include "powcorr/quadrature.hpp"
#include "powcorr/summation.hpp"

namespace powcorr {

// ---------------------------------------------------------------------------
// van der Corput

struct VdcResult {
    double abs_integral = 0.0;
    double bound = 0.0;  // 1 / gamma
    double gamma = 0.0;
    bool convex = true;  // phi'' > 0 at every panel edge
    std::size_t panels = 0;
    bool pass() const { return convex && abs_integral <= bound; }
};

inline constexpr double kVdcMaxOscillations = 5e4;

/// |int_a^b exp(2 pi i l (x^n - x^m)) dx| against 1/gamma,
/// gamma = l n a^(n-1) (1 - 1/a).
inline VdcResult vdc_bound_check(double a, double b, unsigned l, unsigned n, unsigned m, const QuadConfig& cfg = {}) {
    if (!(a > 1.0 && a < b)) throw DomainError("van der Corput check needs 1 < a < b");
    if (n < 2 || m < 1 || m >= n) throw DomainError("van der Corput check needs n > m >= 1 and n >= 2");
    if (l < 1) throw DomainError("van der Corput check needs l >= 1");
    const PowerPhase f = PowerPhase::difference(n, m);
    const long double L = l;
    const long double phi_a = L * f.approx(a), phi_b = L * f.approx(b);
    const long double osc = phi_b - phi_a;
    if (osc > kVdcMaxOscillations)
        throw ResourceError("interval spans " + std::to_string(static_cast<double>(osc)) + " oscillations, cap " +
                            std::to_string(kVdcMaxOscillations));

    VdcResult r;
    r.gamma = static_cast<double>(l) * n * std::pow(a, static_cast<double>(n) - 1) * (1.0 - 1.0 / a);
    r.bound = 1.0 / r.gamma;

    // Panels end where the phase has advanced by a quarter turn.
    std::vector<long double> edges{a};
    const auto steps = static_cast<std::size_t>(std::ceil(4.0L * osc));
    long double x = a;
    for (std::size_t j = 1; j < steps; ++j) {
        const long double target = phi_a + 0.25L * static_cast<long double>(j);
        long double y = x + (target - L * f.approx(x)) / (L * f.deriv(x));
        for (int it = 0; it < 60; ++it) {
            const long double step = (L * f.approx(y) - target) / (L * f.deriv(y));
            y -= step;
            if (std::fabs(step) <= 1e-18L * y) break;
        }
        y = std::clamp(y, x, static_cast<long double>(b));
        edges.push_back(y);
        x = y;
    }
    edges.push_back(b);
    for (long double e : edges)
        if (!(f.second_deriv(e) > 0)) r.convex = false;

    const auto integrate = [&](std::size_t split) {
        CompensatedSum re, im;
        for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
            const long double lo = edges[i], hi = edges[i + 1];
            if (!(hi > lo)) continue;
            const long double h = (hi - lo) / static_cast<long double>(split);
            for (std::size_t p = 0; p < split; ++p) {
                const long double plo = lo + h * p;
                const long double c = plo + 0.5L * h, r2 = 0.5L * h;
                for (std::size_t q = 0; q < boost::math::quadrature::gauss<double, 10>::abscissa().size(); ++q) {
                    const long double node = boost::math::quadrature::gauss<double, 10>::abscissa()[q];
                    const long double w = boost::math::quadrature::gauss<double, 10>::weights()[q];
                    for (const long double sgn : {-1.0L, 1.0L}) {
                        if (node == 0 && sgn < 0) continue;
                        const long double t = c + sgn * r2 * node;
                        // Phase relative to phi(a) keeps the argument small.
                        const long double ph = 2.0L * std::numbers::pi_v<long double> * (L * f.approx(t) - phi_a);
                        re += static_cast<double>(w * r2 * std::cos(ph));
                        im += static_cast<double>(w * r2 * std::sin(ph));
                    }
                }
            }
        }
        return std::hypot(re.value(), im.value());
    };
    double coarse = integrate(1);
    std::size_t split = 1;
    QuadConfig local = cfg;
    local.abs_tol = std::max(cfg.abs_tol, 1e-9 * r.bound);
    bool ok = false;
    for (int d = 0; d < cfg.max_doublings; ++d) {
        split *= 2;
        const double fine = integrate(split);
        if (quad_agrees(coarse, fine, local)) {
            coarse = fine;
            ok = true;
            break;
        }
        coarse = fine;
    }
    if (!ok) throw NumericalError("oscillatory quadrature did not converge");
    r.abs_integral = coarse;
    r.panels = (edges.size() - 1) * split;
    return r;
}

struct VdcTuple {
    double a = 0.0, b = 0.0;
    unsigned l = 1, n = 2, m = 1;
};

/// Deterministic parameter tuples with l <= 8, n <= 20, m < n, [a, b] in (1, 3),
/// each spanning a bounded number of oscillations.
inline std::vector<VdcTuple> vdc_tuples(std::size_t count, std::uint64_t seed, double max_osc = 4e3) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<unsigned> dl(1, 8), dn(2, 20);
    std::uniform_real_distribution<double> da(1.02, 2.9), dw(0.005, 1.0);
    std::vector<VdcTuple> out;
    while (out.size() < count) {
        VdcTuple t;
        t.l = dl(rng);
        t.n = dn(rng);
        t.m = std::uniform_int_distribution<unsigned>(1, t.n - 1)(rng);
        t.a = da(rng);
        t.b = std::min(t.a + dw(rng), 2.99);
        const PowerPhase f = PowerPhase::difference(t.n, t.m);
        const long double cap = f.approx(t.a) + max_osc / t.l;
        if (f.approx(t.b) > cap) {
            // Shrink b to the oscillation cap.
            long double lo = t.a, hi = t.b;
            for (int i = 0; i < 200; ++i) {
                const long double mid = 0.5L * (lo + hi);
                (f.approx(mid) > cap ? hi : lo) = mid;
            }
            t.b = static_cast<double>(lo);
        }
        if (t.b > t.a) out.push_back(t);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Preimages of integer windows

struct LevelInterval {
    long long level = 0;  // the integer M
    double lo = 0.0;      // least x with f(x) >= M - w (clipped)
    double hi = 0.0;      // least x with f(x) >= M + w (clipped)
};

/// {x in [a, b]: f(x) in Z + [-w, w]} for increasing f, as one interval per M.
inline std::vector<LevelInterval> preimage_intervals(const PowerPhase& f, double a, double b, double w) {
    if (!(a > 0 && a <= b)) throw DomainError("preimage interval needs 0 < a <= b");
    if (!(w >= 0 && w < 0.5)) throw DomainError("window must lie in [0, 1/2)");
    std::vector<LevelInterval> out;
    if (w == 0.0) return out;
    const DyadicRational wd = DyadicRational::from_double(w);
    const mpz_class m_lo = (f.exact(a) - wd).floor();
    const mpz_class m_hi = (f.exact(b) + wd).floor() + 1;
    for (mpz_class m = m_lo; m <= m_hi; ++m) {
        const DyadicRational level{m, 0};
        const DyadicRational lo_t = level - wd, hi_t = level + wd;
        if (f.exact(b) < lo_t || f.exact(a) > hi_t) continue;
        const double lo = solve_at_least(f, lo_t, a, b);
        // hi: least x with f(x) > M + w, or b.
        double hi = b;
        if (f.exact(b) > hi_t) {
            hi = solve_at_least(f, hi_t, a, b);
            if (f.exact(hi) == hi_t) hi = std::nextafter(hi, b);
        }
        if (hi > lo) out.push_back({m.get_si(), lo, hi});
    }
    return out;
}

inline double total_measure(const std::vector<LevelInterval>& iv) {
    DyadicRational s{0};
    for (const auto& i : iv) s = s + (DyadicRational::from_double(i.hi) - DyadicRational::from_double(i.lo));
    return s.to_double();
}

/// The intervals I_M = {x in [A, A+1): |x^m1 - x^m2 - M| <= 4s/N}.
inline std::vector<LevelInterval> level_intervals(unsigned m1, unsigned m2, const DyadicRational& a, double s,
                                                  std::size_t n) {
    if (!(m1 > m2 && m2 >= 1)) throw DomainError("level intervals need m1 > m2 >= 1");
    if (a <= DyadicRational{1}) throw DomainError("level intervals need A > 1");
    const double w = 4.0 * s / static_cast<double>(n);
    if (!(w < 0.5)) throw DomainError("window 4s/N must be below 1/2");
    const double lo = a.to_double(), hi = (a + DyadicRational{1}).to_double();
    return preimage_intervals(PowerPhase::difference(m1, m2), lo, hi, w);
}

struct ConvexityMeasure {
    double measure = 0.0;
    double bound = 0.0;  // 4s(b-a)/N + 4s/(N f'(a))
    double slack = 1.25;
    std::size_t intervals = 0;
    bool pass() const { return measure <= slack * bound; }
};

inline ConvexityMeasure convexity_measure(const PowerPhase& f, double a, double b, double s, std::size_t n) {
    if (!(a < b)) throw DomainError("convexity measure needs a < b");
    const double w = s / static_cast<double>(n);
    if (!(w >= 0 && w < 0.5)) throw DomainError("window s/N must lie in [0, 1/2)");
    const long double d1 = f.deriv(a);
    if (!(d1 > 0) || f.second_deriv(a) < 0 || f.second_deriv(b) < 0)
        throw DomainError("phase is not increasing and convex on [a, b]");
    const auto iv = preimage_intervals(f, a, b, w);
    ConvexityMeasure r;
    r.measure = total_measure(iv);
    r.intervals = iv.size();
    const double nd = static_cast<double>(n);
    r.bound = 4.0 * s * (b - a) / nd + 4.0 * s / (nd * static_cast<double>(d1));
    return r;
}

struct MeasureTuple {
    unsigned n = 2, m = 1;  // m == 0: single power x^n
    double s = 1.0;
    std::size_t big_n = 100;
    double a = 1.5, b = 2.5;

    PowerPhase phase() const { return m == 0 ? PowerPhase::single(n) : PowerPhase::difference(n, m); }
};

/// Deterministic tuples (n, m, s, N, [a, b]) with [a, b] in (1, 3).
inline std::vector<MeasureTuple> measure_tuples(std::size_t count, std::uint64_t seed, double max_levels = 2e5) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<unsigned> dn(1, 12);
    std::uniform_int_distribution<int> ds(0, 3), dN(0, 5);
    std::uniform_real_distribution<double> da(1.02, 2.5), dw(0.05, 1.0);
    const double svals[] = {0.25, 0.5, 1.0, 2.0};
    const std::size_t nvals[] = {20, 50, 100, 300, 1000, 5000};
    std::vector<MeasureTuple> out;
    while (out.size() < count) {
        MeasureTuple t;
        t.n = dn(rng);
        t.m = t.n == 1 ? 0 : std::uniform_int_distribution<unsigned>(0, t.n - 1)(rng);
        t.s = svals[ds(rng)];
        t.big_n = nvals[dN(rng)];
        t.a = da(rng);
        t.b = std::min(t.a + dw(rng), 2.99);
        if (4.0 * t.s / static_cast<double>(t.big_n) >= 0.5) continue;
        const PowerPhase f = t.phase();
        if (f.approx(t.b) - f.approx(t.a) > max_levels) continue;
        out.push_back(t);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Overlap integral int_A^{A+1} F(x^n - x^m1) F(x^n - x^m2) dx

/// Least m with floor(A^m1 - A^(m1-1)) - 2 >= A^(m1/2) for every m1 >= m.
inline unsigned overlap_n0(const DyadicRational& a) {
    if (a <= DyadicRational{1}) throw DomainError("overlap needs A > 1");
    const double ad = a.to_double();
    unsigned last_fail = 0, streak = 0;
    DyadicRational prev = a, cur = a * a;
    for (unsigned m1 = 2; streak < 64; ++m1) {
        const mpz_class x = (cur - prev).floor() - 2;
        const double rhs = std::pow(ad, 0.5 * m1);
        const bool ok = x > 0 && x.get_d() >= rhs;
        if (ok) ++streak;
        else {
            last_fail = m1;
            streak = 0;
        }
        prev = cur;
        cur = cur * a;
        if (m1 > 100000) throw NumericalError("N0 search did not settle");
    }
    return last_fail + 1;
}

/// Plain value of the overlap integral, no precondition on m1.
inline double pair_overlap_value(unsigned n, unsigned m1, unsigned m2, const DyadicRational& a, const Mollifier& F,
                                 const QuadConfig& cfg = {}) {
    if (!(n > m1 && m1 >= m2 && m2 >= 1)) throw DomainError("overlap needs n > m1 >= m2 >= 1");
    if (a <= DyadicRational{1}) throw DomainError("overlap needs A > 1");
    if (F.height == 0.0 || F.support_end <= 0.0) return 0.0;
    const PowerPhase f1 = PowerPhase::difference(n, m1), f2 = PowerPhase::difference(n, m2);
    const double lo = a.to_double(), hi = (a + DyadicRational{1}).to_double();
    const std::vector<double> offs{-F.support_end, -F.plateau, F.plateau, F.support_end};
    CompensatedSum sum;
    for (const auto& sup : preimage_intervals(f1, lo, hi, F.support_end)) {
        auto pts = detail::level_breakpoints(f1, sup.lo, sup.hi, offs);
        const auto p2 = detail::level_breakpoints(f2, sup.lo, sup.hi, offs);
        pts.insert(pts.end(), p2.begin(), p2.end());
        std::sort(pts.begin(), pts.end());
        pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
            const double x0 = pts[i], x1 = pts[i + 1];
            const double mid = x0 + 0.5 * (x1 - x0);
            const double u1 = std::fabs(detail::centered_offset(f1, mid));
            const double u2 = std::fabs(detail::centered_offset(f2, mid));
            if (u1 >= F.support_end || u2 >= F.support_end) continue;
            if (u1 <= F.plateau && u2 <= F.plateau) {
                sum += F.height * F.height * (DyadicRational::from_double(x1) - DyadicRational::from_double(x0)).to_double();
                continue;
            }
            const auto g = [&](double x) {
                return F.profile(std::fabs(detail::centered_offset(f1, x))) *
                       F.profile(std::fabs(detail::centered_offset(f2, x)));
            };
            const QuadResult q = detail::doubling_quad(g, x0, x1, cfg);
            if (!q.converged) throw NumericalError("overlap quadrature did not converge");
            sum += q.value;
        }
    }
    return sum.value();
}

/// Calibrated constants for the overlap envelopes (see overlap_calibration).
inline constexpr double kOverlapConstant = 0.25;
inline constexpr double kSelfOverlapConstant = 2.5;

inline double overlap_shape(unsigned n, unsigned m1, unsigned m2, double a, std::size_t big_n) {
    const double nd = static_cast<double>(big_n);
    if (m1 == m2) return 1.0 / nd;
    return 1.0 / (nd * nd) + m1 * std::pow(a, 0.5 * (static_cast<double>(m1) - n)) / (nd * n * (n - m1));
}

struct OverlapResult {
    double value = 0.0;
    double bound = 0.0;
    unsigned n0 = 0;
    bool pass() const { return value <= bound; }
};

/// Overlap value with its envelope; requires m1 >= N0(A) when m1 != m2.
inline OverlapResult pair_overlap_integral(unsigned n, unsigned m1, unsigned m2, const DyadicRational& a,
                                           const Mollifier& F, const QuadConfig& cfg = {}) {
    OverlapResult r;
    r.n0 = overlap_n0(a);
    if (m1 != m2 && m1 < r.n0)
        throw DomainError("overlap needs m1 >= N0 = " + std::to_string(r.n0) + ", got m1 = " + std::to_string(m1));
    r.value = pair_overlap_value(n, m1, m2, a, F, cfg);
    const double c = m1 == m2 ? kSelfOverlapConstant : kOverlapConstant;
    r.bound = c * overlap_shape(n, m1, m2, a.to_double(), F.n);
    return r;
}

}  // namespace powcorr
