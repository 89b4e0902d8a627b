#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "powcorr/commands.hpp"

using namespace powcorr;
namespace fs = std::filesystem;

namespace {

class Commands : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("powcorr_cmd_" + std::to_string(::getpid()) + "_" +
                                            ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir_);
        cfg.out = (dir_ / "out").string();
    }
    void TearDown() override { fs::remove_all(dir_); }

    nlohmann::json json() const {
        std::ifstream is(cfg.out + ".json");
        return nlohmann::json::parse(is);
    }
    std::vector<std::string> csv_lines() const {
        std::ifstream is(cfg.out + ".csv");
        std::vector<std::string> out;
        for (std::string l; std::getline(is, l);) out.push_back(l);
        return out;
    }

    ExperimentConfig cfg;
    fs::path dir_;
};

}  // namespace

TEST_F(Commands, GenRoundTrip) {
    cfg.x = "1.5";
    cfg.n_list = {300};
    EXPECT_EQ(cmd_gen(cfg), 0);
    std::ifstream is(cfg.out + ".sample");
    const auto s = read_sample(is);
    const auto want = ladder_frac_powers(DyadicRational::parse("1.5"), DyadicRational{1}, 300, default_guard_bits(300));
    EXPECT_EQ(s.points, want.points);
    EXPECT_THROW(cmd_gen([&] { auto c = cfg; c.n_list = {10, 20}; return c; }()), UsageError);
}

TEST_F(Commands, PaircorrMatchesLibraryAndEmbedsConfig) {
    cfg.x = "1.25";
    cfg.n_list = {200, 400};
    cfg.s_grid = {0.5, 1.0};
    EXPECT_EQ(cmd_paircorr(cfg), 0);
    const auto j = json();
    EXPECT_EQ(j["schema"], 1);
    EXPECT_EQ(j["command"], "paircorr");
    EXPECT_EQ(j["config"]["x"], "1.25");
    ASSERT_EQ(j["reports"].size(), 2u);
    const auto u = ladder_frac_powers(DyadicRational::parse("1.25"), DyadicRational{1}, 400, default_guard_bits(400));
    EXPECT_EQ(j["reports"][1]["r2"][1].get<double>(), pair_corr(u, 1.0));
    EXPECT_EQ(j["reports"][0]["r2"][0].get<double>(), pair_corr(u.prefix(200), 0.5));
    const auto lines = csv_lines();
    ASSERT_GE(lines.size(), 6u);
    EXPECT_EQ(lines[0].rfind("# config {", 0), 0u);
    EXPECT_EQ(lines[1], "s,r2,N,x");
    EXPECT_EQ(lines.size(), 2u + 4u);
}

TEST_F(Commands, SmoothedPaircorrReportsBothFlavors) {
    cfg.x = "1.25";
    cfg.n_list = {200};
    cfg.smoothed = true;
    EXPECT_EQ(cmd_paircorr(cfg), 0);
    const auto sm = json()["reports"][0]["smoothed"][0];
    EXPECT_LE(sm["inner"].get<double>(), sm["outer"].get<double>());
}

TEST_F(Commands, UsageErrors) {
    auto c = cfg;
    c.source = "bogus";
    EXPECT_THROW(cmd_paircorr(c), UsageError);
    c = cfg;
    c.a = "abc";
    EXPECT_THROW(cmd_paircorr(c), UsageError);
    c = cfg;
    c.s_grid = {};
    EXPECT_THROW(cmd_paircorr(c), UsageError);
    c = cfg;
    c.s_grid = {1.0, 0.5};
    EXPECT_THROW(cmd_paircorr(c), DomainError);
    c = cfg;
    c.probe_mode = true;
    c.n_list = {1000};
    EXPECT_THROW(cmd_paircorr(c), UsageError);
    c = cfg;
    c.samples = 0;
    EXPECT_THROW(cmd_paircorr(c), UsageError);
    EXPECT_THROW(cmd_probe(cfg, "nope"), UsageError);
    c = cfg;
    c.parity = "both";
    c.n_list = {1024};
    EXPECT_THROW(cmd_probe(c, "moment"), UsageError);
}

TEST_F(Commands, ControlsRun) {
    cfg.n_list = {500};
    for (const char* src : {"uniform", "nalpha"}) {
        cfg.source = src;
        EXPECT_EQ(cmd_paircorr(cfg), 0);
        EXPECT_EQ(json()["reports"][0]["meta"]["x"], src);
        EXPECT_EQ(cmd_spacings(cfg), 0);
    }
}

TEST_F(Commands, SpacingsAndTriple) {
    cfg.x = "1.5";
    cfg.n_list = {300};
    cfg.s_grid = {0.5, 1.0};
    EXPECT_EQ(cmd_spacings(cfg), 0);
    EXPECT_EQ(csv_lines()[1], "t,ecdf,N,x");
    EXPECT_EQ(cmd_triple(cfg), 0);
    const auto j = json();
    EXPECT_EQ(j["reports"].size(), 4u);
    const auto u = ladder_frac_powers(DyadicRational::parse("1.5"), DyadicRational{1}, 300, default_guard_bits(300));
    EXPECT_EQ(j["reports"][1]["r3"].get<double>(), triple_corr(u, 0.5, 1.0));
}

TEST_F(Commands, MollifierCheck) {
    cfg.n_list = {10, 100};
    EXPECT_EQ(cmd_mollifier_check(cfg), 0);
    const auto j = json();
    EXPECT_TRUE(j["pass"].get<bool>());
    EXPECT_EQ(j["reports"].size(), 4u);
    EXPECT_EQ(csv_lines().size(), 2u + 24u);
    cfg.n_list = {1};
    EXPECT_THROW(cmd_mollifier_check(cfg), DomainError);
}

TEST_F(Commands, FourierCheck) {
    cfg.n_list = {10};
    EXPECT_EQ(cmd_fourier_check(cfg), 0);
    EXPECT_TRUE(json()["ladders"][0]["non_increasing"].get<bool>());
    cfg.n_list = {10, 20, 40};
    cfg.cutoff_rule = "constant";
    cfg.cutoffs = {16, 32};
    EXPECT_EQ(cmd_fourier_check(cfg), 1);
    EXPECT_TRUE(json()["jackson"]["non_decreasing"].get<bool>());
}

TEST_F(Commands, ProbePartitionAndZ) {
    cfg.a = "1.5";
    cfg.n_list = {1024};
    cfg.blocks_k = {1, 2};
    EXPECT_EQ(cmd_probe(cfg, "partition"), 0);
    auto j = json();
    EXPECT_EQ(j["command"], "probe partition");
    EXPECT_EQ(j["report"]["parameters"]["atoms_k1"], 5);
    EXPECT_EQ(j["report"]["rows"][1]["z"], "2/2^0");
    cfg.blocks_k = {1};
    EXPECT_EQ(cmd_probe(cfg, "z"), 0);
    EXPECT_EQ(json()["report"]["verdict"], "pass");
    cfg.n_list = {1000};
    EXPECT_THROW(cmd_probe(cfg, "z"), DomainError);
}

TEST_F(Commands, ProbeYAndCondexp) {
    cfg.a = "1.5";
    cfg.n_list = {1024};
    cfg.blocks_k = {3};
    cfg.samples = 2;
    EXPECT_EQ(cmd_probe(cfg, "y"), 0);
    cfg.j = 1;
    EXPECT_EQ(cmd_probe(cfg, "condexp"), 0);
    EXPECT_EQ(json()["report"]["verdict"], "reported");
    cfg.j = 2;
    EXPECT_THROW(cmd_probe(cfg, "condexp"), DomainError);
}

TEST_F(Commands, ProbeMomentVdcCount) {
    cfg.a = "1.5";
    cfg.n_list = {1024};
    cfg.mc_samples = 100;
    EXPECT_EQ(cmd_probe(cfg, "moment"), 0);
    cfg.tuples = 3;
    EXPECT_EQ(cmd_probe(cfg, "vdc"), 0);
    EXPECT_EQ(json()["report"]["rows"].size(), 3u);
    cfg.tuples = 5;
    EXPECT_EQ(cmd_probe(cfg, "count"), 0);
    EXPECT_EQ(csv_lines()[1].rfind("quantity,n,m,s,N", 0), 0u);
}

TEST_F(Commands, ProbeOverlap) {
    cfg.a = "1.5";
    cfg.n_list = {100};
    EXPECT_THROW(cmd_probe(cfg, "overlap"), DomainError);  // default m1 = 5 < N0 = 8
    cfg.n = 9;
    cfg.m1 = 8;
    cfg.m2 = 3;
    EXPECT_EQ(cmd_probe(cfg, "overlap"), 0);
    EXPECT_EQ(json()["report"]["parameters"]["N0"], 8);
}

TEST_F(Commands, Sweep) {
    cfg.samples = 10;
    cfg.n_list = {300};
    cfg.s_grid = {1.0};
    const int rc = cmd_sweep(cfg);
    const auto j = json();
    EXPECT_EQ(j["samples"].size(), 10u);
    EXPECT_EQ(rc == 0, j["pass"].get<bool>());
    EXPECT_EQ(j["aggregate"][0]["completed"], 10);
    EXPECT_FALSE(j["partial"].get<bool>());
}

TEST_F(Commands, SweepGuards) {
    cfg.samples = 9;
    EXPECT_THROW(cmd_sweep(cfg), UsageError);
    cfg.samples = 10;
    cfg.n_list = {300};
    cfg.subsequence = true;
    EXPECT_THROW(cmd_sweep(cfg), UsageError);
    cfg.subsequence = false;
    cfg.max_work = 1e3;
    EXPECT_THROW(cmd_sweep(cfg), ResourceError);
    EXPECT_TRUE(json()["partial"].get<bool>());
}

TEST(Subsequence, IndexAndSqueeze) {
    EXPECT_EQ(subsequence_index(1), 1u);
    EXPECT_EQ(subsequence_index((1u << 20) - 1), 1u);
    EXPECT_EQ(subsequence_index(1u << 20), 2u);
    EXPECT_EQ(squeeze_ratio(1), 1048576.0);
    EXPECT_GT(squeeze_ratio(10), 1.0);
}

TEST(Workers, FromEnvironment) {
    ::setenv("POWCORR_WORKERS", "3", 1);
    EXPECT_EQ(workers_from_env(), 3u);
    ::setenv("POWCORR_WORKERS", "zero", 1);
    EXPECT_THROW(workers_from_env(), UsageError);
    ::setenv("POWCORR_WORKERS", "0", 1);
    EXPECT_THROW(workers_from_env(), UsageError);
    ::unsetenv("POWCORR_WORKERS");
    EXPECT_EQ(workers_from_env(), 1u);
}
