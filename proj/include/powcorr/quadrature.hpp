#pragma once

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <cstddef>

namespace powcorr {

/// Composite Gauss-Legendre (10 nodes per panel) over `panels` equal panels.
template <class F>
double gauss_legendre(F&& f, double a, double b, std::size_t panels = 1) {
    if (!(b > a)) return 0.0;
    const double h = (b - a) / static_cast<double>(panels);
    double sum = 0.0;
    for (std::size_t i = 0; i < panels; ++i) {
        const double lo = a + h * static_cast<double>(i);
        const double hi = i + 1 == panels ? b : lo + h;
        sum += boost::math::quadrature::gauss<double, 10>::integrate(f, lo, hi);
    }
    return sum;
}

/// Settings for doubling-checked quadrature.
struct QuadConfig {
    double rel_tol = 1e-8;
    double abs_tol = 1e-15;
    std::size_t base_panels = 1;
    int max_doublings = 6;
};

/// Result of a doubling check: `value` uses twice the panels of `coarse`.
struct QuadResult {
    double value = 0.0;
    double coarse = 0.0;
    std::size_t panels = 0;
    bool converged = false;
};

inline bool quad_agrees(double coarse, double fine, const QuadConfig& cfg) {
    return std::fabs(fine - coarse) <= std::max(cfg.abs_tol, cfg.rel_tol * std::fabs(fine));
}

}  // namespace powcorr
