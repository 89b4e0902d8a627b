// powcorr: correlation experiments and proof probes for {xi x^n}.

#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "powcorr/commands.hpp"

namespace {

constexpr const char* kCsvHelp = R"(CSV outputs (<out>.csv, first line is '# config <json>'):
  paircorr         s,r2,N,x
  spacings         t,ecdf,N,x
  triple           s1,s2,r3,N,x
  mollifier-check  flavor,N,hypothesis,name,pass,measured,limit
  fourier-check    kind,N,L,sup,envelope   (kind: ladder | jackson)
  probe <name>     quantity,<row fields of the probe>
  sweep            sample,x,N,s,r2,within
JSON outputs (<out>.json) carry "schema": 1 and the resolved config.
gen writes <out>.sample: header line, config line, one point per line.
Exit status: 0 checks pass, 1 a check failed, 2 usage, 3 domain,
4 numerical, 5 resource, 6 precision. POWCORR_WORKERS sets the worker count.)";

}  // namespace

int main(int argc, char** argv) {
    using namespace powcorr;
    ExperimentConfig cfg;
    try {
        cfg.workers = workers_from_env();
    } catch (const Error& e) {
        std::cerr << "powcorr: " << e.what() << '\n';
        return exit_code(e.kind());
    }

    CLI::App app{"Pair correlations of {xi x^n} and martingale-approximation probes"};
    app.footer(kCsvHelp);
    app.set_config("--config", "", "Flat key = value config file (keys are the long flag names)");
    app.require_subcommand(1);
    app.fallthrough();

    app.add_option("--source", cfg.source, "power | uniform | nalpha")->capture_default_str();
    app.add_option("-A,--A", cfg.a, "Left end of the x interval [A, A+1), dyadic")->capture_default_str();
    app.add_option("--bits", cfg.mantissa_bits, "Random mantissa bits of sampled x")->capture_default_str();
    app.add_option("-x,--x", cfg.x, "Explicit base x (a/2^b, integer or decimal)");
    app.add_option("--xi", cfg.xi, "Multiplier xi")->capture_default_str();
    app.add_option("--alpha", cfg.alpha, "Control alpha for --source nalpha (default golden conjugate)");
    app.add_option("--seed", cfg.seed, "Master seed")->capture_default_str();
    app.add_option("--samples", cfg.samples, "Number of x samples")->capture_default_str();
    app.add_option("-N,--N", cfg.n_list, "N values")->capture_default_str();
    app.add_option("-s,--s", cfg.s_grid, "s grid")->capture_default_str();
    app.add_option("-g,--guard", cfg.guard_bits, "Guard bits (0 = 64 + ceil(log2 N))")->capture_default_str();
    app.add_flag("--exact", cfg.exact, "Use the exact rational oracle instead of the ladder");
    app.add_flag("--probe-mode", cfg.probe_mode, "Require N to be 10th powers");
    app.add_flag("--smoothed", cfg.smoothed, "Also report mollified pair correlations");
    app.add_option("--mollifier-s", cfg.mollifier_s, "Mollifier window parameter s")->capture_default_str();
    app.add_option("-L,--L", cfg.cutoffs, "Fourier cutoff ladder (default doubling up to N^3)");
    app.add_option("--cutoff-rule", cfg.cutoff_rule, "Jackson cutoff rule: cube | constant")->capture_default_str();
    app.add_option("--constant-cutoff", cfg.constant_cutoff, "Cutoff for the constant rule")->capture_default_str();
    app.add_option("-k,--k", cfg.blocks_k, "Block / filtration indices")->capture_default_str();
    app.add_option("-j,--j", cfg.j, "Coarse filtration index for condexp")->capture_default_str();
    app.add_option("--atom", cfg.atoms, "Atom indices")->capture_default_str();
    app.add_option("--parity", cfg.parity, "odd | even")->capture_default_str();
    app.add_option("--mc-samples", cfg.mc_samples, "Monte Carlo samples for moment")->capture_default_str();
    app.add_option("--tuples", cfg.tuples, "Parameter tuples for vdc / count")->capture_default_str();
    app.add_option("--n", cfg.n, "Overlap exponent n")->capture_default_str();
    app.add_option("--m1", cfg.m1, "Overlap exponent m1")->capture_default_str();
    app.add_option("--m2", cfg.m2, "Overlap exponent m2")->capture_default_str();
    app.add_option("--tolerance", cfg.tolerance, "Sweep tolerance on |R2/(2s) - 1|")->capture_default_str();
    app.add_option("--q", cfg.q, "Sweep pass fraction")->capture_default_str();
    app.add_flag("--subsequence", cfg.subsequence, "Sweep: require N to be 20th powers");
    app.add_option("--max-work", cfg.max_work, "Sweep: cap on N^2 log2 x summed over samples")->capture_default_str();
    app.add_option("-o,--out", cfg.out, "Output path prefix")->capture_default_str();
    app.add_option("--workers", cfg.workers, "Worker threads (default POWCORR_WORKERS or 1)");

    std::string probe_name;
    auto* gen = app.add_subcommand("gen", "Generate a sample file")->fallthrough();
    auto* pair = app.add_subcommand("paircorr", "R2 over the s grid")->fallthrough();
    auto* spac = app.add_subcommand("spacings", "Level spacing ECDF")->fallthrough();
    auto* trip = app.add_subcommand("triple", "Triple correlations")->fallthrough();
    auto* moll = app.add_subcommand("mollifier-check", "Verify mollifier hypotheses")->fallthrough();
    auto* four = app.add_subcommand("fourier-check", "Truncation sup ladder and Jackson trend")->fallthrough();
    auto* probe = app.add_subcommand("probe", "Run a proof probe")->fallthrough();
    probe->add_option("name", probe_name, "partition|y|z|condexp|moment|vdc|count|overlap")->required();
    auto* sweep = app.add_subcommand("sweep", "Fraction of x samples with Poissonian R2")->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_code(ErrorKind::usage);
    }

    try {
        if (cfg.workers == 0) throw UsageError("--workers must be positive");
        int rc = 0;
        if (*gen) rc = cmd_gen(cfg);
        else if (*pair) rc = cmd_paircorr(cfg);
        else if (*spac) rc = cmd_spacings(cfg);
        else if (*trip) rc = cmd_triple(cfg);
        else if (*moll) rc = cmd_mollifier_check(cfg);
        else if (*four) rc = cmd_fourier_check(cfg);
        else if (*probe) rc = cmd_probe(cfg, probe_name);
        else if (*sweep) rc = cmd_sweep(cfg);
        if (rc != 0) std::cerr << "powcorr: one or more checks failed (see " << cfg.out << ".json)\n";
        return rc;
    } catch (const Error& e) {
        std::cerr << "powcorr: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "powcorr: internal error: " << e.what() << '\n';
        return 1;
    }
}
