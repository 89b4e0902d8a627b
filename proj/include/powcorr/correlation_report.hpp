#pragma once

// R2 over an s grid, the spacing ECDF and optional R3 for one sample, with the
// metadata needed to regenerate it.

#include <nlohmann/json.hpp>

#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "powcorr/corr.hpp"
#include "powcorr/errors.hpp"
#include "powcorr/hpgen.hpp"

namespace powcorr {

struct R3Entry {
    double s1 = 0.0, s2 = 0.0, r3 = 0.0;
};

struct CorrelationReport {
    std::vector<double> s_grid;
    std::vector<double> r2;
    std::vector<std::pair<double, double>> spacings_ecdf;
    std::optional<std::vector<R3Entry>> r3;
    // meta
    std::string x;   // numerator/2^exponent, or a label for controls
    std::string xi;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    double err_bound = 0.0;
};

inline void require_increasing(const std::vector<double>& grid, const char* what) {
    if (grid.empty()) throw UsageError(std::string(what) + " is empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0)) throw DomainError(std::string(what) + " entries must be positive");
        if (i > 0 && !(grid[i] > grid[i - 1])) throw DomainError(std::string(what) + " must be strictly increasing");
    }
}

inline CorrelationReport correlation_report(const UnitSample& sample, const std::vector<double>& s_grid,
                                            std::uint64_t seed, bool spacings = true,
                                            const std::vector<double>& r3_grid = {}) {
    require_increasing(s_grid, "s grid");
    CorrelationReport r;
    r.s_grid = s_grid;
    for (double s : s_grid) r.r2.push_back(pair_corr(sample, s));
    if (spacings && sample.n_max >= 2) r.spacings_ecdf = level_spacings(sample).ecdf;
    if (!r3_grid.empty()) {
        require_increasing(r3_grid, "R3 grid");
        std::vector<R3Entry> t;
        for (double s1 : r3_grid)
            for (double s2 : r3_grid) t.push_back({s1, s2, triple_corr(sample, s1, s2)});
        r.r3 = std::move(t);
    }
    r.x = sample.base.to_string();
    r.xi = sample.xi.to_string();
    r.n = sample.n_max;
    r.seed = seed;
    r.err_bound = sample.err_bound;
    return r;
}

inline nlohmann::ordered_json to_json(const CorrelationReport& r) {
    nlohmann::ordered_json j;
    j["s_grid"] = r.s_grid;
    j["r2"] = r.r2;
    auto ecdf = nlohmann::ordered_json::array();
    for (const auto& [t, f] : r.spacings_ecdf) ecdf.push_back({t, f});
    j["spacings_ecdf"] = ecdf;
    if (r.r3) {
        auto t = nlohmann::ordered_json::array();
        for (const auto& e : *r.r3) t.push_back({{"s1", e.s1}, {"s2", e.s2}, {"r3", e.r3}});
        j["r3"] = t;
    } else {
        j["r3"] = nullptr;
    }
    j["meta"] = {{"x", r.x}, {"xi", r.xi}, {"N", r.n}, {"seed", r.seed}, {"err_bound", r.err_bound}};
    return j;
}

/// One row per s: s,r2,N,x
inline void write_csv_rows(std::ostream& os, const CorrelationReport& r) {
    char buf[64];
    for (std::size_t i = 0; i < r.s_grid.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g", r.s_grid[i], r.r2[i]);
        os << buf << ',' << r.n << ',' << r.x << '\n';
    }
}

inline void write_csv(std::ostream& os, const CorrelationReport& r) {
    os << "s,r2,N,x\n";
    write_csv_rows(os, r);
}

}  // namespace powcorr
