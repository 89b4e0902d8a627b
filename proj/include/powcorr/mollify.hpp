#pragma once

// Even, 1-periodic, piecewise-cubic bumps F1 <= chi_[-s/N, s/N] <= F2 and the
// centered G = F - integral(F).
//
// Profile in u = ||t||: height on [0, p], a cubic smoothstep ramp
// 1 - psi((u - p)/delta) with psi(tau) = 3 tau^2 - 2 tau^3 on [p, p + delta],
// zero beyond. The ramp is C^1 and its steepest slope is (3/2)/delta.

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "powcorr/errors.hpp"

namespace powcorr {

enum class Flavor { inner, outer };

inline const char* to_string(Flavor f) { return f == Flavor::inner ? "inner" : "outer"; }

struct Mollifier {
    double s = 1.0;
    std::size_t n = 1;
    double delta = 1.0;
    Flavor flavor = Flavor::outer;
    double plateau = 0.0;      // p
    double support_end = 0.0;  // p + delta, with inner pinned to exactly s/N
    double height = 1.0;       // 1 for every constructed mollifier

    double window() const { return s / static_cast<double>(n); }

    /// Closed form 2p + delta, scaled by the height.
    double integral() const { return height * (2.0 * plateau + delta); }

    double max_slope() const { return height * 1.5 / delta; }

    /// ||t|| reduced symmetrically so eval(t) == eval(-t) bit for bit.
    static double circle_abs(double t) {
        const double r = std::fmod(std::fabs(t), 1.0);
        return std::min(r, 1.0 - r);
    }

    double profile(double u) const {
        if (u <= plateau) return height;
        if (u >= support_end) return 0.0;
        const double tau = (u - plateau) / delta;
        return height * (1.0 - tau * tau * (3.0 - 2.0 * tau));
    }

    /// d/du of the profile.
    double profile_deriv(double u) const {
        if (u <= plateau || u >= support_end) return 0.0;
        const double tau = (u - plateau) / delta;
        return -height * 6.0 * tau * (1.0 - tau) / delta;
    }

    double operator()(double t) const { return profile(circle_abs(t)); }
};

/// Least N with 1/N^2 <= s/N (support inside [-2s/N, 2s/N]) whose support
/// radius s/N + 1/N^2 is also below 1/2, so periodized copies never overlap.
inline std::size_t min_mollifier_n(double s) {
    if (!(s > 0)) throw DomainError("mollifier needs s > 0");
    auto n = static_cast<std::size_t>(std::ceil(1.0 / s));
    n = std::max<std::size_t>(n, 1);
    while (s / static_cast<double>(n) + 1.0 / (static_cast<double>(n) * n) >= 0.5) ++n;
    while (1.0 / static_cast<double>(n) > s) ++n;
    return n;
}

inline Mollifier make_outer(double s, std::size_t n) {
    const std::size_t n0 = min_mollifier_n(s);
    if (n < n0)
        throw DomainError("outer mollifier for s=" + std::to_string(s) + " needs N >= " + std::to_string(n0) +
                          ", got " + std::to_string(n));
    Mollifier f;
    f.s = s;
    f.n = n;
    const double nd = static_cast<double>(n);
    f.delta = 1.0 / (nd * nd);
    f.flavor = Flavor::outer;
    f.plateau = s / nd;
    f.support_end = f.plateau + f.delta;
    return f;
}

inline Mollifier make_inner(double s, std::size_t n) {
    if (!(s > 0)) throw DomainError("mollifier needs s > 0");
    const double nd = static_cast<double>(n);
    const double delta = 1.0 / (nd * nd);
    if (!(s / nd - delta > 0) || n < min_mollifier_n(s)) {
        std::size_t need = std::max<std::size_t>(min_mollifier_n(s), 1);
        while (!(s / static_cast<double>(need) - 1.0 / (static_cast<double>(need) * need) > 0)) ++need;
        throw DomainError("inner mollifier for s=" + std::to_string(s) + " needs N >= " + std::to_string(need) +
                          ", got " + std::to_string(n));
    }
    Mollifier f;
    f.s = s;
    f.n = n;
    f.delta = delta;
    f.flavor = Flavor::inner;
    f.support_end = s / nd;
    f.plateau = f.support_end - delta;
    return f;
}

inline double eval(const Mollifier& f, double t) { return f(t); }

inline double eval_deriv(const Mollifier& f, double t) {
    const double a = std::fabs(t);
    const double r = std::fmod(a, 1.0);
    const double u = std::min(r, 1.0 - r);
    const double du_da = r <= 0.5 ? 1.0 : -1.0;
    const double da_dt = t < 0 ? -1.0 : 1.0;
    return f.profile_deriv(u) * du_da * da_dt;
}

/// G = F - integral(F); the mean is the closed form, so integral(G) is 0.
struct CenteredMollifier {
    Mollifier base;
    double mean = 0.0;

    double operator()(double t) const { return base(t) - mean; }
    double deriv(double t) const { return eval_deriv(base, t); }
};

inline CenteredMollifier centered(const Mollifier& f) { return {f, f.integral()}; }

/// A degenerate "mollifier" that is identically c after centering; used by
/// probes whose integrand must collapse to a constant.
inline CenteredMollifier constant_centered(double c) {
    Mollifier zero;
    zero.height = 0.0;
    zero.plateau = -1.0;
    zero.support_end = -1.0;
    zero.delta = 1.0;
    return {zero, -c};
}

// ---------------------------------------------------------------------------
// Hypothesis verifier.

struct HypothesisCheck {
    int index = 0;  // 1..6
    std::string name;
    bool pass = false;
    double measured = 0.0;
    double limit = 0.0;
    double witness = std::numeric_limits<double>::quiet_NaN();  // a failing t, if any
};

struct HypothesisReport {
    Mollifier mollifier;
    std::vector<HypothesisCheck> checks;
    double integral = 0.0;
    bool all_pass() const {
        return std::all_of(checks.begin(), checks.end(), [](const HypothesisCheck& c) { return c.pass; });
    }
};

namespace detail {

/// Points of [-1/2, 1/2] that are dyadic with few bits (so t + 1 and -t are
/// exact), dense on the ramps and coarse elsewhere.
inline std::vector<double> verification_grid(const Mollifier& f, int per_ramp = 2048, int coarse = 1 << 14) {
    std::vector<double> ts;
    const auto snap = [](double v) { return std::ldexp(std::nearbyint(std::ldexp(v, 40)), -40); };
    for (int i = 0; i <= coarse; ++i) ts.push_back(snap(-0.5 + static_cast<double>(i) / coarse));
    for (double sign : {-1.0, 1.0}) {
        for (int i = 0; i <= per_ramp; ++i) {
            const double u = f.plateau + f.delta * (static_cast<double>(i) / per_ramp);
            ts.push_back(sign * u);  // exact values, including the ramp ends
        }
        ts.push_back(sign * (f.plateau + 0.5 * f.delta));
    }
    return ts;
}

}  // namespace detail

/// Numerical check of the six hypotheses on a dense grid, plus the analytic
/// integral, derivative bound and support radius.
inline HypothesisReport verify_hypotheses(const Mollifier& f, double s, std::size_t n) {
    HypothesisReport rep;
    rep.mollifier = f;
    rep.integral = f.integral();
    const double nd = static_cast<double>(n);
    const auto grid = detail::verification_grid(f);

    HypothesisCheck periodic{1, "periodic", true, 0.0, 0.0};
    HypothesisCheck even{2, "even", true, 0.0, 0.0};
    for (double t : grid) {
        const double v = f(t);
        for (double shift : {1.0, -1.0, 3.0}) {
            const double ts = t + shift;
            if (ts - shift != t) continue;  // only exactly representable shifts
            const double d = std::fabs(f(ts) - v);
            if (d > periodic.measured) periodic.measured = d;
            if (d != 0.0 && periodic.pass) {
                periodic.pass = false;
                periodic.witness = t;
            }
        }
        const double d = std::fabs(f(-t) - v);
        if (d > even.measured) even.measured = d;
        if (d != 0.0 && even.pass) {
            even.pass = false;
            even.witness = t;
        }
    }

    // Closed-form integral against 2s/N, with the realized O(1/N^2) constant 1.
    HypothesisCheck integral{3, "integral", false, std::fabs(rep.integral - 2.0 * s / nd), 1.0 / (nd * nd)};
    // Two-point Gauss-Legendre is exact for each cubic piece.
    {
        const double g = 1.0 / std::sqrt(3.0);
        const auto piece = [&](double a, double b) {
            const double c = 0.5 * (a + b), h = 0.5 * (b - a);
            return h * (f.profile(c - h * g) + f.profile(c + h * g));
        };
        const double quad = 2.0 * (piece(0.0, std::max(f.plateau, 0.0)) +
                                   piece(std::max(f.plateau, 0.0), std::max(f.support_end, 0.0)));
        integral.pass = integral.measured <= integral.limit * (1 + 1e-12) &&
                        std::fabs(quad - rep.integral) <= 1e-15 + 1e-12 * std::fabs(rep.integral);
        if (!integral.pass) integral.witness = quad;
    }

    HypothesisCheck bounded{4, "0<=F<=1", true, 0.0, 1.0};
    HypothesisCheck slope{5, "sup|F'|=O(N^2)", true, 0.0, 1.5 * nd * nd};
    HypothesisCheck support{6, "supp within 2s/N", true, f.support_end, 2.0 * s / nd};
    double lo = 0.0, hi = 0.0;
    for (double t : grid) {
        const double v = f(t);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        if ((v < 0.0 || v > 1.0) && bounded.pass) {
            bounded.pass = false;
            bounded.witness = t;
        }
        const double d = std::fabs(eval_deriv(f, t));
        slope.measured = std::max(slope.measured, d);
        if (Mollifier::circle_abs(t) > 2.0 * s / nd && v != 0.0 && support.pass) {
            support.pass = false;
            support.witness = t;
        }
    }
    bounded.measured = hi;
    slope.pass = slope.pass && slope.measured <= slope.limit * (1 + 1e-12) &&
                 f.max_slope() <= slope.limit * (1 + 1e-12);
    if (!slope.pass) slope.witness = f.plateau + 0.5 * f.delta;
    if (f.support_end > support.limit) {
        support.pass = false;
        if (std::isnan(support.witness)) support.witness = f.support_end;
    }
    rep.checks = {periodic, even, integral, bounded, slope, support};
    return rep;
}

/// Flat key=value form (s, N, delta, flavor).
inline std::string to_config(const Mollifier& f) {
    std::ostringstream os;
    os.precision(17);
    os << "s=" << f.s << "\nN=" << f.n << "\ndelta=" << f.delta << "\nflavor=" << to_string(f.flavor) << '\n';
    return os.str();
}

inline Mollifier mollifier_from_config(const std::string& text) {
    std::istringstream is(text);
    std::string line, flavor = "outer";
    double s = 0;
    std::size_t n = 0;
    while (std::getline(is, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        const std::string k = line.substr(0, eq), v = line.substr(eq + 1);
        if (k == "s") s = std::stod(v);
        else if (k == "N") n = std::stoull(v);
        else if (k == "flavor") flavor = v;
    }
    if (flavor == "inner") return make_inner(s, n);
    if (flavor == "outer") return make_outer(s, n);
    throw DomainError("unknown mollifier flavor: " + flavor);
}

}  // namespace powcorr
