#pragma once

// Experiment commands behind the powcorr executable. Each takes a resolved
// ExperimentConfig, writes its report files and returns 0 when every asserted
// check passed, 1 otherwise. Invalid input and failed preconditions throw.

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "powcorr/corr.hpp"
#include "powcorr/correlation_report.hpp"
#include "powcorr/errors.hpp"
#include "powcorr/fourier.hpp"
#include "powcorr/hpgen.hpp"
#include "powcorr/mollify.hpp"
#include "powcorr/probe.hpp"

namespace powcorr {

inline constexpr int kSchemaVersion = 1;

struct ExperimentConfig {
    // sample source
    std::string source = "power";  // power | uniform | nalpha
    std::string a = "1.02";
    int mantissa_bits = 64;
    std::string x;  // explicit base; overrides A / seed sampling
    std::string xi = "1";
    std::string alpha;  // nalpha control; empty = golden conjugate
    std::uint64_t seed = 1;
    std::size_t samples = 1;
    std::vector<std::size_t> n_list{5000};
    std::vector<double> s_grid{1.0};
    int guard_bits = 0;  // 0 = 64 + ceil(log2 N)
    bool exact = false;
    bool probe_mode = false;
    bool smoothed = false;

    // mollifier and Fourier
    double mollifier_s = 1.0;
    std::vector<std::size_t> cutoffs;  // Fourier L ladder; empty = doubling ladder up to N^3
    std::string cutoff_rule = "cube";
    std::size_t constant_cutoff = 64;

    // probes
    std::vector<long> blocks_k{1};
    long j = 1;
    std::vector<std::uint64_t> atoms{0};
    std::string parity = "odd";
    std::size_t mc_samples = 200;
    std::size_t gap_samples = 10;
    std::size_t tuples = 50;
    unsigned n = 8, m1 = 5, m2 = 3;
    double lo = 1.5, hi = 2.5;

    // sweep
    double tolerance = 0.15;
    double q = 0.9;
    bool subsequence = false;
    double max_work = 2e12;  // cap on sum over samples of N^2 log2 x bit operations

    std::string out = "powcorr_out";
    unsigned workers = 1;

    nlohmann::ordered_json to_json() const {
        return {{"source", source},
                {"A", a},
                {"mantissa_bits", mantissa_bits},
                {"x", x},
                {"xi", xi},
                {"alpha", alpha},
                {"seed", seed},
                {"samples", samples},
                {"N", n_list},
                {"s", s_grid},
                {"guard_bits", guard_bits},
                {"exact", exact},
                {"probe_mode", probe_mode},
                {"smoothed", smoothed},
                {"mollifier_s", mollifier_s},
                {"cutoffs", cutoffs},
                {"cutoff_rule", cutoff_rule},
                {"constant_cutoff", constant_cutoff},
                {"k", blocks_k},
                {"j", j},
                {"atoms", atoms},
                {"parity", parity},
                {"mc_samples", mc_samples},
                {"gap_samples", gap_samples},
                {"tuples", tuples},
                {"n", n},
                {"m1", m1},
                {"m2", m2},
                {"lo", lo},
                {"hi", hi},
                {"tolerance", tolerance},
                {"q", q},
                {"subsequence", subsequence},
                {"max_work", max_work},
                {"out", out},
                {"workers", workers}};
    }
};

/// Worker count from POWCORR_WORKERS, default 1.
inline unsigned workers_from_env() {
    if (const char* v = std::getenv("POWCORR_WORKERS")) {
        try {
            const long w = std::stol(v);
            if (w >= 1) return static_cast<unsigned>(w);
        } catch (const std::exception&) {
        }
        throw UsageError(std::string("POWCORR_WORKERS must be a positive integer, got '") + v + "'");
    }
    return 1;
}

namespace detail {

inline DyadicRational parse_base(const std::string& text, const char* what) {
    try {
        return DyadicRational::parse(text);
    } catch (const DomainError& e) {
        throw UsageError(std::string("bad ") + what + ": " + e.what());
    }
}

inline nlohmann::ordered_json envelope(const std::string& command, const ExperimentConfig& cfg) {
    return {{"schema", kSchemaVersion}, {"command", command}, {"config", cfg.to_json()}};
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) throw ResourceError("cannot open " + path + " for writing");
    os << text;
    if (!os) throw ResourceError("write failed: " + path);
}

inline void write_json(const ExperimentConfig& cfg, const nlohmann::ordered_json& j) {
    write_text(cfg.out + ".json", j.dump(2) + "\n");
}

/// CSV with the resolved config as a leading comment line.
inline void write_csv(const ExperimentConfig& cfg, const std::string& header, const std::string& rows) {
    write_text(cfg.out + ".csv", "# config " + cfg.to_json().dump() + "\n" + header + "\n" + rows);
}

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline bool is_power(std::size_t n, int e) {
    for (std::uint64_t k = 1;; ++k) {
        std::uint64_t p = 1;
        for (int i = 0; i < e; ++i) {
            if (p > UINT64_MAX / k) return false;
            p *= k;
        }
        if (p == n) return true;
        if (p > n) return false;
    }
}

inline void require_n_list(const ExperimentConfig& cfg) {
    if (cfg.n_list.empty()) throw UsageError("N list is empty");
    for (std::size_t n : cfg.n_list) {
        if (n == 0) throw UsageError("N must be positive");
        if (cfg.probe_mode && !is_power(n, 10))
            throw UsageError("N = " + std::to_string(n) + " is not a 10th power (probe mode)");
    }
}

inline std::size_t max_n(const ExperimentConfig& cfg) {
    std::size_t m = 0;
    for (auto n : cfg.n_list) m = std::max(m, n);
    return m;
}

/// The base points used by sample-driven commands, in sample order.
struct SampleSpec {
    std::string label;
    std::optional<DyadicRational> x;
    std::uint64_t seed = 0;
};

inline std::vector<SampleSpec> sample_specs(const ExperimentConfig& cfg) {
    if (cfg.samples == 0) throw UsageError("sample count must be at least 1");
    std::vector<SampleSpec> out;
    if (cfg.source == "power") {
        if (!cfg.x.empty()) {
            const auto x = parse_base(cfg.x, "x");
            out.push_back({x.to_string(), x, cfg.seed});
            return out;
        }
        const auto a = parse_base(cfg.a, "A");
        const auto seeds = derive_seeds(cfg.seed, cfg.samples);
        for (std::size_t i = 0; i < cfg.samples; ++i) {
            const auto x = sample_x(a, cfg.mantissa_bits, seeds[i]);
            out.push_back({x.to_string(), x, seeds[i]});
        }
    } else if (cfg.source == "uniform") {
        const auto seeds = derive_seeds(cfg.seed, cfg.samples);
        for (std::size_t i = 0; i < cfg.samples; ++i) out.push_back({"uniform", std::nullopt, seeds[i]});
    } else if (cfg.source == "nalpha") {
        out.push_back({"nalpha", std::nullopt, cfg.seed});
    } else {
        throw UsageError("unknown source '" + cfg.source + "' (power, uniform, nalpha)");
    }
    return out;
}

inline UnitSample materialize(const ExperimentConfig& cfg, const SampleSpec& spec, std::size_t n) {
    if (cfg.source == "uniform") return uniform_sample(n, spec.seed);
    if (cfg.source == "nalpha") {
        const DyadicRational alpha = cfg.alpha.empty() ? golden_conjugate(64) : parse_base(cfg.alpha, "alpha");
        auto s = control_nalpha(alpha, n);
        s.storage_bound = kStorageBound;
        return s;
    }
    const auto xi = parse_base(cfg.xi, "xi");
    if (cfg.exact) return exact_frac_powers(*spec.x, xi, n);
    const int g = cfg.guard_bits > 0 ? cfg.guard_bits : default_guard_bits(n);
    return ladder_frac_powers(*spec.x, xi, n, g);
}

inline Parity parse_parity(const std::string& p) {
    if (p == "odd") return Parity::odd;
    if (p == "even") return Parity::even;
    throw UsageError("parity must be odd or even, got '" + p + "'");
}

}  // namespace detail

// ---------------------------------------------------------------------------

inline int cmd_gen(const ExperimentConfig& cfg) {
    detail::require_n_list(cfg);
    if (cfg.n_list.size() != 1) throw UsageError("gen takes exactly one N");
    if (cfg.source != "power") throw UsageError("gen only generates power samples");
    const auto specs = detail::sample_specs(cfg);
    const UnitSample s = detail::materialize(cfg, specs.front(), cfg.n_list.front());
    std::ostringstream os;
    write_sample(os, s);
    std::string text = os.str();
    const auto nl = text.find('\n');
    text.insert(nl + 1, "# config " + cfg.to_json().dump() + "\n");
    detail::write_text(cfg.out + ".sample", text);
    return 0;
}

inline int cmd_paircorr(const ExperimentConfig& cfg) {
    detail::require_n_list(cfg);
    require_increasing(cfg.s_grid, "s grid");
    auto j = detail::envelope("paircorr", cfg);
    auto reports = nlohmann::ordered_json::array();
    std::string rows;
    const auto specs = detail::sample_specs(cfg);
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const UnitSample full = detail::materialize(cfg, specs[i], detail::max_n(cfg));
        for (std::size_t n : cfg.n_list) {
            const UnitSample s = full.prefix(n);
            auto r = correlation_report(s, cfg.s_grid, specs[i].seed, false);
            if (!specs[i].x) r.x = specs[i].label;
            auto rj = to_json(r);
            rj["sample"] = i;
            if (cfg.smoothed) {
                auto sm = nlohmann::ordered_json::array();
                for (double sv : cfg.s_grid) {
                    nlohmann::ordered_json e{{"s", sv}};
                    for (auto flavor : {Flavor::inner, Flavor::outer}) {
                        try {
                            const auto f = flavor == Flavor::inner ? make_inner(sv, n) : make_outer(sv, n);
                            e[to_string(flavor)] = pair_corr_smoothed(s, f);
                        } catch (const DomainError& err) {
                            e[to_string(flavor)] = nullptr;
                            e[std::string(to_string(flavor)) + "_error"] = err.what();
                        }
                    }
                    sm.push_back(e);
                }
                rj["smoothed"] = sm;
            }
            reports.push_back(rj);
            std::ostringstream os;
            write_csv_rows(os, r);
            rows += os.str();
        }
    }
    j["reports"] = reports;
    detail::write_json(cfg, j);
    detail::write_csv(cfg, "s,r2,N,x", rows);
    return 0;
}

inline int cmd_spacings(const ExperimentConfig& cfg) {
    detail::require_n_list(cfg);
    auto j = detail::envelope("spacings", cfg);
    auto reports = nlohmann::ordered_json::array();
    std::string rows;
    const auto specs = detail::sample_specs(cfg);
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const UnitSample full = detail::materialize(cfg, specs[i], detail::max_n(cfg));
        for (std::size_t n : cfg.n_list) {
            const auto sp = level_spacings(full.prefix(n));
            auto e = nlohmann::ordered_json::array();
            for (const auto& [t, f] : sp.ecdf) {
                e.push_back({t, f});
                rows += detail::fmt(t) + "," + detail::fmt(f) + "," + std::to_string(n) + "," + specs[i].label + "\n";
            }
            reports.push_back({{"sample", i},
                               {"x", specs[i].label},
                               {"N", n},
                               {"ks_exponential", sp.ks_exponential()},
                               {"star_discrepancy", star_discrepancy(full.prefix(n))},
                               {"ecdf", e}});
        }
    }
    j["reports"] = reports;
    detail::write_json(cfg, j);
    detail::write_csv(cfg, "t,ecdf,N,x", rows);
    return 0;
}

inline int cmd_triple(const ExperimentConfig& cfg) {
    detail::require_n_list(cfg);
    require_increasing(cfg.s_grid, "s grid");
    auto j = detail::envelope("triple", cfg);
    auto reports = nlohmann::ordered_json::array();
    std::string rows;
    const auto specs = detail::sample_specs(cfg);
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const UnitSample full = detail::materialize(cfg, specs[i], detail::max_n(cfg));
        for (std::size_t n : cfg.n_list) {
            const UnitSample s = full.prefix(n);
            for (double s1 : cfg.s_grid)
                for (double s2 : cfg.s_grid) {
                    const double r3 = triple_corr(s, s1, s2);
                    reports.push_back({{"sample", i}, {"x", specs[i].label}, {"N", n}, {"s1", s1}, {"s2", s2},
                                       {"r3", r3}, {"poisson", 4.0 * s1 * s2}});
                    rows += detail::fmt(s1) + "," + detail::fmt(s2) + "," + detail::fmt(r3) + "," + std::to_string(n) +
                            "," + specs[i].label + "\n";
                }
        }
    }
    j["reports"] = reports;
    detail::write_json(cfg, j);
    detail::write_csv(cfg, "s1,s2,r3,N,x", rows);
    return 0;
}

inline int cmd_mollifier_check(const ExperimentConfig& cfg) {
    if (cfg.n_list.empty()) throw UsageError("N list is empty");
    auto j = detail::envelope("mollifier-check", cfg);
    auto reports = nlohmann::ordered_json::array();
    std::string rows;
    bool ok = true;
    for (std::size_t n : cfg.n_list)
        for (auto flavor : {Flavor::inner, Flavor::outer}) {
            const auto f = flavor == Flavor::inner ? make_inner(cfg.mollifier_s, n) : make_outer(cfg.mollifier_s, n);
            const auto rep = verify_hypotheses(f, cfg.mollifier_s, n);
            ok = ok && rep.all_pass();
            auto checks = nlohmann::ordered_json::array();
            for (const auto& c : rep.checks) {
                checks.push_back({{"index", c.index}, {"name", c.name}, {"pass", c.pass}, {"measured", c.measured},
                                  {"limit", c.limit}, {"witness", c.witness}});
                rows += std::string(to_string(flavor)) + "," + std::to_string(n) + "," + std::to_string(c.index) + "," +
                        c.name + "," + (c.pass ? "1" : "0") + "," + detail::fmt(c.measured) + "," +
                        detail::fmt(c.limit) + "\n";
            }
            reports.push_back({{"flavor", to_string(flavor)}, {"N", n}, {"integral", rep.integral},
                               {"closed_form", 2.0 * f.plateau + f.delta}, {"pass", rep.all_pass()}, {"checks", checks}});
        }
    j["reports"] = reports;
    j["pass"] = ok;
    detail::write_json(cfg, j);
    detail::write_csv(cfg, "flavor,N,hypothesis,name,pass,measured,limit", rows);
    return ok ? 0 : 1;
}

inline int cmd_fourier_check(const ExperimentConfig& cfg) {
    if (cfg.n_list.empty()) throw UsageError("N list is empty");
    auto j = detail::envelope("fourier-check", cfg);
    auto ladders = nlohmann::ordered_json::array();
    std::string rows;
    bool ok = true;
    for (std::size_t n : cfg.n_list) {
        const auto g = centered(make_outer(cfg.mollifier_s, n));
        std::vector<std::size_t> ladder = cfg.cutoffs;
        if (ladder.empty())
            for (std::size_t l = 16; l <= n * n * n; l *= 2) ladder.push_back(l);
        auto pts = nlohmann::ordered_json::array();
        double prev = INFINITY;
        bool monotone = true;
        for (std::size_t l : ladder) {
            const auto t = truncation_sup(g, l, 8 * l);
            if (t.sup > prev + 1e-12) monotone = false;
            prev = t.sup;
            pts.push_back({{"L", l}, {"sup", t.sup}, {"grid", t.grid_size}, {"argmax", t.argmax}});
            rows += "ladder," + std::to_string(n) + "," + std::to_string(l) + "," + detail::fmt(t.sup) + ",\n";
        }
        ok = ok && monotone;
        ladders.push_back({{"N", n}, {"non_increasing", monotone}, {"points", pts}});
    }
    j["ladders"] = ladders;
    if (cfg.n_list.size() >= 3) {
        const CutoffRule rule = cfg.cutoff_rule == "constant" ? CutoffRule::constant : CutoffRule::cube;
        if (cfg.cutoff_rule != "constant" && cfg.cutoff_rule != "cube")
            throw UsageError("cutoff rule must be cube or constant");
        const auto tr = jackson_trend(cfg.mollifier_s, cfg.n_list, rule, cfg.constant_cutoff);
        auto pts = nlohmann::ordered_json::array();
        for (const auto& p : tr.points) {
            pts.push_back({{"N", p.n}, {"L", p.cutoff}, {"sup", p.sup}, {"envelope", p.envelope}});
            rows += "jackson," + std::to_string(p.n) + "," + std::to_string(p.cutoff) + "," + detail::fmt(p.sup) + "," +
                    detail::fmt(p.envelope) + "\n";
        }
        j["jackson"] = {{"slope", tr.slope},
                        {"slope_limit", tr.slope_limit},
                        {"intercept", tr.intercept},
                        {"residuals", tr.residuals},
                        {"non_decreasing", tr.non_decreasing},
                        {"envelope_constant", tr.envelope_constant()},
                        {"pass", tr.pass()},
                        {"points", pts}};
        ok = ok && tr.pass();
    }
    j["pass"] = ok;
    detail::write_json(cfg, j);
    detail::write_csv(cfg, "kind,N,L,sup,envelope", rows);
    return ok ? 0 : 1;
}

// ---------------------------------------------------------------------------
// probes

namespace detail {

inline const std::vector<std::string>& probe_names() {
    static const std::vector<std::string> names{"partition", "y", "z", "condexp", "moment", "vdc", "count", "overlap"};
    return names;
}

inline std::size_t single_probe_n(const ExperimentConfig& cfg) {
    require_n_list(cfg);
    return cfg.n_list.front();
}

inline ProbeReport probe_partition(const ExperimentConfig& cfg) {
    const auto a = parse_base(cfg.a, "A");
    const std::size_t n = single_probe_n(cfg);
    const auto scheme = blocks(n);
    ProbeReport r;
    r.quantity = "partition";
    r.parameters = {{"A", a.to_string()}, {"N", n}, {"K", scheme.block_len}};
    bool ok = true;
    for (long k : cfg.blocks_k) {
        const auto fp = filtration(a, k, static_cast<long>(scheme.block_len));
        const auto pts = fp.points();
        const auto mus = fp.mus();
        const bool ends = pts.back() == a + DyadicRational{1};
        bool mono = true;
        for (std::size_t i = 1; i < mus.size(); ++i) mono = mono && mus[i] >= mus[i - 1];
        ok = ok && ends && mono;
        for (std::size_t i = 0; i < pts.size(); ++i)
            r.rows.push_back({{"k", k}, {"i", i}, {"z", pts[i].to_string()}, {"z_value", pts[i].to_double()},
                              {"mu", i < mus.size() ? nlohmann::ordered_json(mus[i]) : nlohmann::ordered_json(nullptr)}});
        r.parameters["atoms_k" + std::to_string(k)] = fp.atom_count();
    }
    r.measured = static_cast<double>(r.rows.size());
    r.bound_form = "last point == A+1, mu non-decreasing";
    r.verdict = ok ? Verdict::pass : Verdict::fail;
    return r;
}

inline ProbeReport probe_y(const ExperimentConfig& cfg) {
    const std::size_t n = single_probe_n(cfg);
    const auto scheme = blocks(n);
    const auto g = centered(make_outer(cfg.mollifier_s, n));
    const auto specs = sample_specs(cfg);
    ProbeReport r;
    r.quantity = "block_sum_Y";
    r.parameters = {{"A", cfg.a}, {"N", n}, {"K", scheme.block_len}, {"s", cfg.mollifier_s}};
    double worst = 0;
    const double envelope = std::pow(static_cast<double>(n), 1.1);
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const UnitSample s = materialize(cfg, specs[i], n);
        const auto y = block_sums(s, scheme, g);
        for (long k : cfg.blocks_k) {
            scheme.require_block(static_cast<std::size_t>(k));
            const double v = y[static_cast<std::size_t>(k) - 1];
            const double trivial = static_cast<double>(scheme.term_count(static_cast<std::size_t>(k))) *
                                   std::max(1.0 - g.mean, g.mean);
            worst = std::max(worst, std::fabs(v) / trivial);
            r.rows.push_back({{"sample", i}, {"x", specs[i].label}, {"k", k}, {"Y", v}, {"term_bound", trivial},
                              {"envelope", envelope}});
        }
        double sup = 0;
        for (double v : y) sup = std::max(sup, std::fabs(v));
        r.rows.push_back({{"sample", i}, {"x", specs[i].label}, {"k", "sup"}, {"Y", sup}, {"term_bound", nullptr},
                          {"envelope", envelope}});
    }
    r.measured = worst;
    r.bound = 1.0;
    r.bound_form = "|Y_k| / (terms * sup|G|) <= 1";
    r.verdict = worst <= 1.0 ? Verdict::pass : Verdict::fail;
    return r;
}

inline ProbeReport probe_z(const ExperimentConfig& cfg) {
    const auto a = parse_base(cfg.a, "A");
    const std::size_t n = single_probe_n(cfg);
    const auto scheme = blocks(n);
    const auto g = centered(make_outer(cfg.mollifier_s, n));
    ProbeReport r;
    r.quantity = "cond_exp_Z";
    r.parameters = {{"A", a.to_string()}, {"N", n}, {"K", scheme.block_len}};
    bool ok = true;
    double worst = 0;
    for (long k : cfg.blocks_k) {
        const auto fp = filtration(a, k, static_cast<long>(scheme.block_len));
        for (std::uint64_t at : cfg.atoms) {
            const auto [lo, hi] = fp.atom(at);
            r.rows.push_back({{"k", k}, {"atom", at}, {"lo", lo.to_double()}, {"hi", hi.to_double()},
                              {"Z", cond_exp_Z(fp, static_cast<std::size_t>(k), scheme, g, at)}});
        }
        const auto t = tower_check(a, static_cast<std::size_t>(k), scheme, g);
        worst = std::max(worst, t.rel_error());
        ok = ok && t.rel_error() <= 1e-6;
        r.rows.push_back({{"k", k}, {"atom", "tower"}, {"lo", t.weighted_average}, {"hi", t.integral},
                          {"Z", t.rel_error()}});
    }
    r.measured = worst;
    r.bound = 1e-6;
    r.bound_form = "tower property relative error";
    r.verdict = ok ? Verdict::pass : Verdict::fail;
    return r;
}

inline ProbeReport probe_condexp(const ExperimentConfig& cfg) {
    const auto a = parse_base(cfg.a, "A");
    const std::size_t n = single_probe_n(cfg);
    const auto scheme = blocks(n);
    const auto g = centered(make_outer(cfg.mollifier_s, n));
    if (cfg.blocks_k.size() != 1) throw UsageError("condexp takes a single k");
    return cond_exp_cross(a, static_cast<std::size_t>(cfg.j), static_cast<std::size_t>(cfg.blocks_k.front()), scheme, g,
                          cfg.atoms);
}

inline ProbeReport probe_moment(const ExperimentConfig& cfg) {
    require_n_list(cfg);
    const auto a = parse_base(cfg.a, "A");
    const Parity p = parse_parity(cfg.parity);
    if (cfg.n_list.size() == 1) {
        const auto scheme = blocks(cfg.n_list.front());
        return parity_moment(a, scheme, centered(make_outer(cfg.mollifier_s, scheme.n)), p, cfg.mc_samples, cfg.seed,
                             cfg.workers);
    }
    return moment_trend(a, cfg.mollifier_s, cfg.n_list, p, cfg.mc_samples, cfg.seed, 1.45, cfg.workers);
}

inline ProbeReport probe_vdc(const ExperimentConfig& cfg) {
    ProbeReport r;
    r.quantity = "van_der_corput";
    r.parameters = {{"tuples", cfg.tuples}, {"seed", cfg.seed}};
    std::size_t passed = 0;
    double worst = 0;
    const auto tuples = vdc_tuples(cfg.tuples, cfg.seed);
    std::vector<VdcResult> res(tuples.size());
    parallel_for(tuples.size(), cfg.workers,
                 [&](std::size_t i) { res[i] = vdc_bound_check(tuples[i].a, tuples[i].b, tuples[i].l, tuples[i].n, tuples[i].m); });
    for (std::size_t i = 0; i < tuples.size(); ++i) {
        const auto& t = tuples[i];
        passed += res[i].pass();
        worst = std::max(worst, res[i].abs_integral / res[i].bound);
        r.rows.push_back({{"a", t.a}, {"b", t.b}, {"l", t.l}, {"n", t.n}, {"m", t.m}, {"abs_integral", res[i].abs_integral},
                          {"bound", res[i].bound}, {"convex", res[i].convex}, {"pass", res[i].pass()}});
    }
    r.measured = worst;
    r.bound = 1.0;
    r.bound_form = "abs_integral * gamma <= 1";
    r.parameters["passed"] = passed;
    r.verdict = passed == tuples.size() ? Verdict::pass : Verdict::fail;
    return r;
}

inline ProbeReport probe_count(const ExperimentConfig& cfg) {
    ProbeReport r;
    r.quantity = "convexity_measure";
    r.parameters = {{"tuples", cfg.tuples}, {"seed", cfg.seed}};
    std::size_t passed = 0;
    double worst = 0;
    const auto tuples = measure_tuples(cfg.tuples, cfg.seed);
    for (const auto& t : tuples) {
        const auto m = convexity_measure(t.phase(), t.a, t.b, t.s, t.big_n);
        passed += m.pass();
        worst = std::max(worst, m.measure / m.bound);
        r.rows.push_back({{"n", t.n}, {"m", t.m}, {"s", t.s}, {"N", t.big_n}, {"a", t.a}, {"b", t.b},
                          {"measure", m.measure}, {"bound", m.bound}, {"intervals", m.intervals}, {"pass", m.pass()}});
    }
    r.measured = worst;
    r.bound = 1.25;
    r.bound_form = "measure / (4s(b-a)/N + 4s/(N f'(a))) <= 1.25";
    r.parameters["passed"] = passed;
    r.verdict = passed == tuples.size() ? Verdict::pass : Verdict::fail;
    return r;
}

inline ProbeReport probe_overlap(const ExperimentConfig& cfg) {
    const auto a = parse_base(cfg.a, "A");
    const std::size_t n = single_probe_n(cfg);
    const auto f = make_outer(cfg.mollifier_s, n);
    ProbeReport r;
    r.quantity = "pair_overlap";
    r.parameters = {{"A", a.to_string()}, {"N", n}, {"n", cfg.n}, {"m1", cfg.m1}, {"m2", cfg.m2}, {"s", cfg.mollifier_s},
                    {"N0", overlap_n0(a)}};
    const auto res = pair_overlap_integral(cfg.n, cfg.m1, cfg.m2, a, f);
    r.measured = res.value;
    r.bound = res.bound;
    r.bound_form = cfg.m1 == cfg.m2 ? "C/N" : "C*(1/N^2 + m1 A^((m1-n)/2) / (N n (n-m1)))";
    r.verdict = res.pass() ? Verdict::pass : Verdict::fail;
    return r;
}

}  // namespace detail

inline int cmd_probe(const ExperimentConfig& cfg, const std::string& name) {
    ProbeReport r;
    if (name == "partition") r = detail::probe_partition(cfg);
    else if (name == "y") r = detail::probe_y(cfg);
    else if (name == "z") r = detail::probe_z(cfg);
    else if (name == "condexp") r = detail::probe_condexp(cfg);
    else if (name == "moment") r = detail::probe_moment(cfg);
    else if (name == "vdc") r = detail::probe_vdc(cfg);
    else if (name == "count") r = detail::probe_count(cfg);
    else if (name == "overlap") r = detail::probe_overlap(cfg);
    else throw UsageError("unknown probe '" + name + "'");
    auto j = detail::envelope("probe " + name, cfg);
    j["report"] = r.to_json();
    detail::write_json(cfg, j);
    std::ostringstream os;
    write_csv(os, r);
    detail::write_text(cfg.out + ".csv", "# config " + cfg.to_json().dump() + "\n" + os.str());
    return r.failed() ? 1 : 0;
}

// ---------------------------------------------------------------------------
// sweep

/// M_N = floor(N^(1/20)), decided exactly.
inline std::uint64_t subsequence_index(std::size_t n) {
    if (n == 0) throw DomainError("N must be positive");
    std::uint64_t m = 1;
    const auto pow20 = [](std::uint64_t k) {
        long double p = 1;
        for (int i = 0; i < 20; ++i) p *= static_cast<long double>(k);
        return p;
    };
    while (pow20(m + 1) <= static_cast<long double>(n)) ++m;
    return m;
}

/// (M+1)^20 / M^20.
inline double squeeze_ratio(std::uint64_t m) { return std::pow(1.0 + 1.0 / static_cast<double>(m), 20.0); }

inline int cmd_sweep(const ExperimentConfig& cfg) {
    if (cfg.samples == 0) throw UsageError("sweep needs at least one x sample");
    if (cfg.samples < 10) throw UsageError("sweep needs at least 10 x samples");
    if (cfg.source != "power") throw UsageError("sweep runs on power samples");
    detail::require_n_list(cfg);
    require_increasing(cfg.s_grid, "s grid");
    if (cfg.subsequence)
        for (std::size_t n : cfg.n_list)
            if (!detail::is_power(n, 20))
                throw UsageError("N = " + std::to_string(n) + " is not a 20th power (subsequence mode)");
    const auto specs = detail::sample_specs(cfg);
    const std::size_t nmax = detail::max_n(cfg);

    // Work estimate per sample: N^2 log2 x bit operations for the ladder.
    std::vector<bool> run(specs.size(), false);
    double work = 0;
    bool partial = false;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const double w = static_cast<double>(nmax) * static_cast<double>(nmax) * detail::log2_of(*specs[i].x);
        if (work + w > cfg.max_work) {
            partial = true;
            continue;
        }
        work += w;
        run[i] = true;
    }

    struct Row {
        std::size_t n;
        double s, r2;
    };
    std::vector<std::vector<Row>> rows(specs.size());
    parallel_for(specs.size(), cfg.workers, [&](std::size_t i) {
        if (!run[i]) return;
        const UnitSample full = detail::materialize(cfg, specs[i], nmax);
        for (std::size_t n : cfg.n_list)
            for (double s : cfg.s_grid) rows[i].push_back({n, s, pair_corr(full.prefix(n), s)});
    });

    auto j = detail::envelope("sweep", cfg);
    auto samples = nlohmann::ordered_json::array();
    std::string csv;
    std::map<std::pair<std::size_t, double>, std::size_t> within, total;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        nlohmann::ordered_json e{{"index", i}, {"x", specs[i].label}, {"seed", specs[i].seed}, {"completed", static_cast<bool>(run[i])}};
        auto rs = nlohmann::ordered_json::array();
        for (const auto& r : rows[i]) {
            const double dev = std::fabs(r.r2 / (2.0 * r.s) - 1.0);
            const bool ok = dev <= cfg.tolerance;
            within[{r.n, r.s}] += ok;
            total[{r.n, r.s}] += 1;
            rs.push_back({{"N", r.n}, {"s", r.s}, {"r2", r.r2}, {"deviation", dev}, {"within", ok}});
            csv += std::to_string(i) + "," + specs[i].label + "," + std::to_string(r.n) + "," + detail::fmt(r.s) + "," +
                   detail::fmt(r.r2) + "," + (ok ? "1" : "0") + "\n";
        }
        e["rows"] = rs;
        samples.push_back(e);
    }
    bool ok = !partial;
    auto agg = nlohmann::ordered_json::array();
    for (const auto& [key, count] : total) {
        const double frac = static_cast<double>(within[key]) / static_cast<double>(cfg.samples);
        const bool pass = frac >= cfg.q;
        ok = ok && pass;
        agg.push_back({{"N", key.first}, {"s", key.second}, {"within", within[key]}, {"completed", count},
                       {"fraction", frac}, {"pass", pass}});
    }
    auto sub = nlohmann::ordered_json::array();
    for (std::size_t n : cfg.n_list) {
        const auto m = subsequence_index(n);
        sub.push_back({{"N", n}, {"M", m}, {"M_pow20", std::pow(static_cast<double>(m), 20.0)},
                       {"squeeze_ratio", squeeze_ratio(m)}});
    }
    j["samples"] = samples;
    j["aggregate"] = agg;
    j["subsequence"] = sub;
    j["partial"] = partial;
    j["pass"] = ok;
    detail::write_json(cfg, j);
    detail::write_csv(cfg, "sample,x,N,s,r2,within", csv);
    if (partial) throw ResourceError("work cap reached; partial sweep report written to " + cfg.out + ".json");
    return ok ? 0 : 1;
}

}  // namespace powcorr
