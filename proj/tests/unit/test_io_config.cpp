#include <gtest/gtest.h>

#include <filesystem>

#include "mixsim/config.hpp"
#include "mixsim/dynamics.hpp"
#include "mixsim/io.hpp"
#include "test_support.hpp"

using namespace mixsim;

namespace {

Panel sample_panel() {
    const auto cfg = mixsim::testing::small_config(30, 2, 4, 5);
    return simulate_worlds(cfg, StructuralParams{}, {}, TreatmentPlan::experiment(cfg)).experiment;
}

}  // namespace

TEST(Format, RoundTripsExactly) {
    for (double v : {0.1, -1.0 / 3.0, 1e-300, 123456789.123456789, 0.0})
        EXPECT_EQ(io::parse_double(io::fmt(v)), v);
    EXPECT_EQ(io::fmt(kUndefined), "NA");
    EXPECT_TRUE(std::isnan(io::parse_double("NA")));
    EXPECT_THROW(io::parse_double("1.5x"), ConfigError);
    EXPECT_THROW(io::parse_int("2.0"), ConfigError);
}

TEST(PanelCsv, RoundTrip) {
    const auto p = sample_panel();
    std::istringstream is(io::panel_csv(p));
    const auto back = io::read_panel_csv(is);
    EXPECT_EQ(back.y, p.y);
    EXPECT_EQ(back.w, p.w);
    EXPECT_EQ(back.q, p.q);
    EXPECT_EQ(back.t_warmup, p.t_warmup);
    EXPECT_EQ(back.scenario, Scenario::experiment);
    EXPECT_EQ(back.seed, p.seed);
}

TEST(PanelCsv, SeveralScenarios) {
    const auto cfg = mixsim::testing::small_config(20, 2, 4, 6);
    const auto w = simulate_worlds(cfg, StructuralParams{}, {}, TreatmentPlan::experiment(cfg));
    std::ostringstream os;
    io::write_panel_csv(os, w.control);
    io::write_panel_csv(os, w.experiment, false);
    std::istringstream is(os.str());
    const auto all = io::read_panels_csv(is);
    ASSERT_EQ(all.size(), 2u);
    EXPECT_EQ(all.at("control").y, w.control.y);
    std::istringstream again(os.str());
    EXPECT_THROW(io::read_panel_csv(again, "treatment"), ConfigError);
}

TEST(PanelCsv, Errors) {
    const std::string head = std::string(io::kPanelHeader) + "\n";
    auto read = [](const std::string& s) {
        std::istringstream is(s);
        return io::read_panel_csv(is);
    };
    EXPECT_THROW(read("a,b,c\n1,2,3\n"), ConfigError);
    EXPECT_THROW(read(head), ConfigError);
    EXPECT_THROW(read(head + "experiment,0,0,0,0,1.0\n"), ConfigError);
    EXPECT_THROW(read(head + "experiment,0,0,0,0,1,0.5\nexperiment,0,0,1,2,1,0.5\n"), ConfigError);
    EXPECT_THROW(read(head + "experiment,0,0,0,0,1,0.5\nexperiment,0,0,1,1,1,0.5\nexperiment,0,1,0,0,1,0.5\n"),
                 ConfigError);
    EXPECT_THROW(read(head + "experiment,0,0,0,0,1,0.5\nexperiment,0,0,0,0,1,0.5\n"), ConfigError);
    EXPECT_THROW(read(head + "bogus,0,0,0,0,1,0.5\nbogus,0,0,1,0,1,0.5\n"), ConfigError);
}

TEST(EffectsCsv, WideWithPadding) {
    EffectSeries a(2), b(1);
    a[1] = 0.5;
    a[2] = kUndefined;
    b[1] = -1.0;
    EXPECT_EQ(io::effects_csv({{"a", a}, {"b", b}}), "t,a,b\n0,0,0\n1,0.5,-1\n2,NA,NA\n");
}

TEST(Hash, GitBlobIds) {
    EXPECT_EQ(io::blob_sha1(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
    EXPECT_EQ(io::blob_sha1("hello world\n"), "3b18e512dba79e4c8300dd08aeb37f8e728b8dad");
}

TEST(Files, WriteReadAndUnwritable) {
    const auto dir = std::filesystem::temp_directory_path() / "mixsim_io_test";
    std::filesystem::remove_all(dir);
    io::write_file(dir / "a" / "b.txt", "content");
    EXPECT_EQ(io::read_file(dir / "a" / "b.txt"), "content");
    EXPECT_THROW(io::read_file(dir / "missing.txt"), ConfigError);
    io::write_file(dir / "plain", "x");
    EXPECT_THROW(io::ensure_writable_dir(dir / "plain" / "sub"), OutputError);
    std::filesystem::remove_all(dir);
}

TEST(Config, RoundTrip) {
    BenchmarkConfig c;
    c.engine = EngineKind::synthetic;
    c.seeds = {3, 4};
    c.population.n_units = 321;
    c.structural.gamma = -0.05;
    c.structural.sigma_time_path = std::vector<double>(16, 0.25);
    c.subpop.block_size = 17;
    c.estimator.human_memory = HumanMemory::own;
    c.estimator.identifiability.p_match_tol = 0.01;
    c.kernel.human.cells[2][1] = {0.2, 0.3, 0.5};
    c.kernel.ai.mood.reversion = 0.25;
    c.population.prior_mode = PriorMode::model_faithful;
    c.population.type_prior = PriorDistribution::two_point(0.1, 0.9, 0.3);
    c.interference = InterferenceMode::dense;
    const auto j = to_json(c);
    const auto back = config_from_json(j);
    EXPECT_EQ(to_json(back), j);
    EXPECT_EQ(back.kernel.human.cells[2][1].reply, 0.2);
    EXPECT_EQ(back.population.type_prior.weight_a, 0.3);
    EXPECT_EQ(parse_config(j.dump()).population.n_units, 321u);
}

TEST(Config, PartialOverlay) {
    BenchmarkConfig c;
    apply_json(c, nlohmann::json::parse(R"({"population": {"n_units": 50}, "phases": [0.3, 0.6]})"));
    EXPECT_EQ(c.population.n_units, 50u);
    EXPECT_EQ(c.population.t_warmup, 4);
    EXPECT_EQ(c.phases, (std::vector<double>{0.3, 0.6}));
    EXPECT_EQ(c.kernel.human.mood.sponsored, agentsim::BehaviorKernel::defaults().human.mood.sponsored);
}

TEST(Config, Rejections) {
    EXPECT_THROW(parse_config("{"), ConfigError);
    EXPECT_THROW(parse_config(R"({"populaton": {}})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"population": {"n_units": "many"}})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"engine": "quantum"})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"estimator": {"human_memory": "both"}})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"kernel": {"human": {"cells": {"positive": [[0.1, 0.2]]}}}})"), ConfigError);
    auto c = parse_config(R"({"phases": [1.5]})");
    EXPECT_THROW(c.validate(), ConfigError);
}
