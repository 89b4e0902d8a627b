#pragma once

// Integrals of Y_k over intervals of [A, A+1), conditional expectations on
// filtration atoms, and the probes built on them.
//
// Each term F(x^n - x^m) is integrated exactly on plateaus and by
// Gauss-Legendre on the ramps. The preimages of M +- p and M +- R
// (R the support radius) are located to the last binary64 bit, so every
// quadrature piece carries a polynomial integrand.

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "powcorr/dyadic.hpp"
#include "powcorr/errors.hpp"
#include "powcorr/mollify.hpp"
#include "powcorr/phase.hpp"
#include "powcorr/probe/blocks.hpp"
#include "powcorr/probe/filtration.hpp"
#include "powcorr/probe/report.hpp"
#include "powcorr/quadrature.hpp"
#include "powcorr/summation.hpp"

namespace powcorr {

namespace detail {

/// Sorted, deduplicated preimages in [lo, hi] of every level M + c, c in
/// `offsets`, for integers M covering f([lo, hi]).
inline std::vector<double> level_breakpoints(const PowerPhase& f, double lo, double hi,
                                             const std::vector<double>& offsets) {
    std::vector<double> pts{lo, hi};
    const mpz_class m_lo = f.exact(lo).floor() - 1;
    const mpz_class m_hi = f.exact(hi).floor() + 1;
    for (mpz_class m = m_lo; m <= m_hi; ++m) {
        const DyadicRational base{m, 0};
        for (double c : offsets) {
            const double x = solve_at_least(f, base + DyadicRational::from_double(c), lo, hi);
            if (x > lo && x < hi) pts.push_back(x);
        }
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

/// Signed distance from f(x) to the nearest integer, exact before rounding.
inline double centered_offset(const PowerPhase& f, double x) {
    const DyadicRational v = f.exact(x);
    const DyadicRational r = v.frac();
    const DyadicRational half{1, 1};
    return (r < half ? r : r - DyadicRational{1}).to_double();
}

template <class Integrand>
QuadResult doubling_quad(Integrand&& g, double a, double b, const QuadConfig& cfg) {
    std::size_t panels = std::max<std::size_t>(cfg.base_panels, 1);
    double coarse = gauss_legendre(g, a, b, panels);
    for (int d = 0; d < cfg.max_doublings; ++d) {
        panels *= 2;
        const double fine = gauss_legendre(g, a, b, panels);
        if (quad_agrees(coarse, fine, cfg)) return {fine, coarse, panels, true};
        coarse = fine;
    }
    return {coarse, coarse, panels, false};
}

inline void require_interval(double lo, double hi) {
    if (!(lo > 1.0 && lo <= hi)) throw DomainError("integration interval must satisfy 1 < lo <= hi");
}

}  // namespace detail

/// int_lo^hi F(f(x)) dx.
inline double term_integral(const PowerPhase& f, const Mollifier& F, double lo, double hi,
                            const QuadConfig& cfg = {}) {
    detail::require_interval(lo, hi);
    if (F.height == 0.0 || F.support_end <= 0.0 || lo == hi) return 0.0;
    const std::vector<double> offs{-F.support_end, -F.plateau, F.plateau, F.support_end};
    const auto pts = detail::level_breakpoints(f, lo, hi, offs);
    CompensatedSum sum;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double a = pts[i], b = pts[i + 1];
        const double u = std::fabs(detail::centered_offset(f, a + 0.5 * (b - a)));
        if (u >= F.support_end) continue;
        if (u <= F.plateau) {
            sum += F.height * (DyadicRational::from_double(b) - DyadicRational::from_double(a)).to_double();
            continue;
        }
        const auto integrand = [&](double x) { return F.profile(std::fabs(detail::centered_offset(f, x))); };
        const QuadResult q = detail::doubling_quad(integrand, a, b, cfg);
        if (!q.converged)
            throw NumericalError("ramp quadrature did not converge on [" + std::to_string(a) + ", " + std::to_string(b) +
                                 "]: " + std::to_string(q.coarse) + " vs " + std::to_string(q.value));
        sum += q.value;
    }
    return sum.value();
}

/// int_lo^hi Y_k(x) dx.
inline double integrate_Y(std::size_t k, const BlockScheme& scheme, const CenteredMollifier& g, double lo, double hi,
                          const QuadConfig& cfg = {}) {
    scheme.require_block(k);
    detail::require_interval(lo, hi);
    CompensatedSum sum;
    if (g.base.height != 0.0)
        for (std::size_t n = scheme.first(k); n <= scheme.last(k); ++n)
            for (std::size_t m = 1; m < n; ++m)
                sum += term_integral(PowerPhase::difference(static_cast<unsigned>(n), static_cast<unsigned>(m)), g.base,
                                     lo, hi, cfg);
    sum += -g.mean * static_cast<double>(scheme.term_count(k)) * (hi - lo);
    return sum.value();
}

namespace detail {

inline std::pair<double, double> atom_doubles(const FiltrationPartition& fp, std::uint64_t i) {
    const auto [a, b] = fp.atom(i);
    const double lo = a.to_double(), hi = b.to_double();
    if (!(DyadicRational::from_double(lo) == a && DyadicRational::from_double(hi) == b))
        throw DomainError("atom endpoints are not binary64 values");
    return {lo, hi};
}

}  // namespace detail

/// Z_k on atom `atom_index` of F_k: the average of Y_k over the atom.
inline double cond_exp_Z(const FiltrationPartition& fp, std::size_t k, const BlockScheme& scheme,
                         const CenteredMollifier& g, std::uint64_t atom_index, const QuadConfig& cfg = {}) {
    if (atom_index >= fp.atom_count())
        throw DomainError("atom index " + std::to_string(atom_index) + " >= atom count " +
                          std::to_string(fp.atom_count()));
    const auto [lo, hi] = detail::atom_doubles(fp, atom_index);
    return integrate_Y(k, scheme, g, lo, hi, cfg) / (hi - lo);
}

inline double cond_exp_Z(const DyadicRational& a, std::size_t k, const BlockScheme& scheme, const CenteredMollifier& g,
                         std::uint64_t atom_index, const QuadConfig& cfg = {}) {
    return cond_exp_Z(filtration(a, static_cast<long>(k), static_cast<long>(scheme.block_len)), k, scheme, g,
                      atom_index, cfg);
}

struct TowerCheck {
    double weighted_average = 0.0;  // sum over atoms of |atom| Z
    double integral = 0.0;          // int_A^{A+1} Y_k
    std::uint64_t atoms = 0;
    double rel_error() const { return std::fabs(weighted_average - integral) / std::max(std::fabs(integral), 1e-300); }
};

inline TowerCheck tower_check(const DyadicRational& a, std::size_t k, const BlockScheme& scheme,
                              const CenteredMollifier& g, const QuadConfig& cfg = {}) {
    const auto fp = filtration(a, static_cast<long>(k), static_cast<long>(scheme.block_len));
    TowerCheck t;
    t.atoms = fp.atom_count();
    CompensatedSum sum;
    for (std::uint64_t i = 0; i < fp.atom_count(); ++i) {
        const auto [lo, hi] = detail::atom_doubles(fp, i);
        sum += (hi - lo) * cond_exp_Z(fp, k, scheme, g, i, cfg);
    }
    t.weighted_average = sum.value();
    const double lo = a.to_double();
    t.integral = integrate_Y(k, scheme, g, lo, (a + DyadicRational{1}).to_double(), cfg);
    return t;
}

/// sup over the atom of |d/dx Y_k| bounded by sum over terms of sup|F'| f'(hi).
inline double y_slope_bound(std::size_t k, const BlockScheme& scheme, const CenteredMollifier& g, double hi) {
    if (g.base.height == 0.0) return 0.0;
    double s = 0.0;
    for (std::size_t n = scheme.first(k); n <= scheme.last(k); ++n)
        for (std::size_t m = 1; m < n; ++m)
            s += static_cast<double>(PowerPhase::difference(static_cast<unsigned>(n), static_cast<unsigned>(m)).deriv(hi));
    return s * g.base.max_slope();
}

/// max |Y_k(x) - Z_k(atom of x)| at `sample_count` points spread over the atoms.
inline ProbeReport approx_gap(const DyadicRational& a, std::size_t k, const BlockScheme& scheme,
                              const CenteredMollifier& g, std::size_t sample_count, const QuadConfig& cfg = {}) {
    if (sample_count < 10) throw DomainError("approx_gap needs at least 10 samples");
    const auto fp = filtration(a, static_cast<long>(k), static_cast<long>(scheme.block_len));
    ProbeReport r;
    r.quantity = "approx_gap";
    r.parameters = {{"A", a.to_string()}, {"N", scheme.n}, {"K", scheme.block_len}, {"k", k}, {"samples", sample_count}};
    const std::uint64_t atoms = fp.atom_count();
    std::vector<double> z(atoms);
    std::vector<bool> have(atoms, false);
    double worst = 0.0, mvt = 0.0;
    for (std::size_t i = 0; i < sample_count; ++i) {
        // Sample i sits at relative position (2j+1)/(2 per) of atom i mod atoms.
        const std::uint64_t at = i % atoms;
        const std::uint64_t per = (sample_count + atoms - 1) / atoms;
        const std::uint64_t j = i / atoms;
        const auto [lo, hi] = fp.atom(at);
        const DyadicRational pos = lo + DyadicRational::from_double((2.0 * static_cast<double>(j) + 1.0) /
                                                                    (2.0 * static_cast<double>(per))) * (hi - lo);
        if (!have[at]) {
            z[at] = cond_exp_Z(fp, k, scheme, g, at, cfg);
            have[at] = true;
        }
        const double y = block_sum_at(pos, k, scheme, g);
        const double gap = std::fabs(y - z[at]);
        const double len = (hi - lo).to_double();
        const double bound = len * y_slope_bound(k, scheme, g, hi.to_double());
        worst = std::max(worst, gap);
        mvt = std::max(mvt, bound);
        r.rows.push_back({{"atom", at}, {"x", pos.to_double()}, {"Y", y}, {"Z", z[at]}, {"gap", gap}, {"mvt_bound", bound}});
    }
    const double nd = static_cast<double>(scheme.n);
    r.measured = worst;
    r.bound = mvt;
    r.bound_form = "max over atoms of |atom| * sup|Y'|";
    r.parameters["envelope"] = std::pow(nd, 4.1) * std::pow(a.to_double(), -0.5 * static_cast<double>(scheme.block_len));
    r.verdict = worst <= mvt ? Verdict::pass : Verdict::fail;
    return r;
}

/// Averages of Y_k over atoms of F_j, k - j >= 2.
inline ProbeReport cond_exp_cross(const DyadicRational& a, std::size_t j, std::size_t k, const BlockScheme& scheme,
                                  const CenteredMollifier& g, const std::vector<std::uint64_t>& atom_sample,
                                  const QuadConfig& cfg = {}) {
    if (k < j + 2) throw DomainError("cond_exp_cross needs k - j >= 2, got j=" + std::to_string(j) + " k=" + std::to_string(k));
    scheme.require_block(k);
    const auto fj = filtration(a, static_cast<long>(j), static_cast<long>(scheme.block_len));
    const auto fk = filtration(a, static_cast<long>(k), static_cast<long>(scheme.block_len));
    ProbeReport r;
    r.quantity = "cond_exp_cross";
    r.parameters = {{"A", a.to_string()}, {"N", scheme.n}, {"K", scheme.block_len}, {"j", j}, {"k", k}};
    double worst = 0.0;
    for (std::uint64_t at : atom_sample) {
        if (at >= fj.atom_count()) throw DomainError("atom index outside F_j");
        const auto [dlo, dhi] = fj.atom(at);
        const double lo = dlo.to_double(), hi = dhi.to_double();
        const double value = integrate_Y(k, scheme, g, lo, hi, cfg) / (hi - lo);
        // Largest |Z_k| among the F_k atoms inside this F_j atom.
        double zmax = 0.0;
        for (std::uint64_t i = fk.atom_index(dlo); i < fk.atom_count() && fk.atom(i).first < dhi; ++i)
            zmax = std::max(zmax, std::fabs(cond_exp_Z(fk, k, scheme, g, i, cfg)));
        worst = std::max(worst, std::fabs(value));
        r.rows.push_back({{"atom", at}, {"lo", lo}, {"hi", hi}, {"value", value}, {"max_abs_Zk", zmax}});
    }
    const double nd = static_cast<double>(scheme.n);
    r.measured = worst;
    r.bound = std::log(nd) / std::pow(nd, 2.9);
    r.bound_form = "log(N)/N^2.9 (constant not fixed)";
    r.verdict = Verdict::reported;
    return r;
}

}  // namespace powcorr
