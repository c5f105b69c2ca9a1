#include <gtest/gtest.h>

#include "mixsim/dynamics.hpp"
#include "mixsim/ese.hpp"

using namespace mixsim;

namespace {

PopulationConfig cfg_of(std::size_t n, int warm = 4, int main = 12, std::uint64_t seed = 0) {
    PopulationConfig c;
    c.n_units = n;
    c.t_warmup = warm;
    c.t_main = main;
    c.seed = seed;
    return c;
}

StructuralParams interaction_free() {
    StructuralParams p;
    p.alpha = p.beta = p.gamma = 0.0;
    p.sigma_fixed = p.sigma_time = 0.0;
    return p;
}

std::vector<std::uint8_t> alternating(std::size_t n) {
    std::vector<std::uint8_t> u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = i % 2 == 0;
    return u;
}

}  // namespace

TEST(Interference, ZeroVarianceEntriesAreTypeMeans) {
    StructuralParams p;
    p.mu_h = 1.5;
    p.mu_a = 0.5;
    p.sigma_fixed = 0.0;
    const auto u = alternating(10);
    const auto h = build_interference(p, u, InterferenceMode::streamed, SeedTree(1));
    for (std::size_t i = 0; i < 10; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < 10; ++j) {
            EXPECT_EQ(h.entry(i, j), (u[i] ? 1.5 : 0.5) / 10.0);
            row += h.entry(i, j);
        }
        EXPECT_NEAR(row, u[i] ? 1.5 : 0.5, 1e-15);
    }
}

// Row sums are Normal(mu_H, sigma^2) for human rows; averaging 5000 of them
// gives a standard error of 1/sqrt(5000) ~ 0.014.
TEST(Interference, HumanRowSumsConcentrate) {
    StructuralParams p;
    p.mu_h = 1.0;
    p.mu_a = 1.0;
    p.sigma_fixed = 1.0;
    const std::size_t n = 10000;
    const auto u = alternating(n);
    const auto h = build_interference(p, u, InterferenceMode::streamed, SeedTree(2));
    const std::vector<double> ones(n, 1.0);
    const auto sums = h.apply(ones);
    double acc = 0.0;
    std::size_t rows = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (u[i]) {
            acc += sums[i];
            ++rows;
        }
    EXPECT_NEAR(acc / static_cast<double>(rows), 1.0, 0.05);
}

TEST(Interference, DenseAndStreamedAgreeBitForBit) {
    StructuralParams p;
    p.sigma_fixed = 0.7;
    const auto u = alternating(300);
    const auto dense = build_interference(p, u, InterferenceMode::dense, SeedTree(5));
    const auto streamed = build_interference(p, u, InterferenceMode::streamed, SeedTree(5));
    std::vector<double> g(300);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = std::sin(static_cast<double>(i));
    EXPECT_EQ(dense.apply(g), streamed.apply(g));
    EXPECT_EQ(dense.entry(17, 203), streamed.entry(17, 203));
}

TEST(Interference, DenseRefusedAboveLimit) {
    StructuralParams p;
    p.sigma_fixed = 1.0;
    const auto u = alternating(50);
    EXPECT_THROW(build_interference(p, u, InterferenceMode::dense, SeedTree(1), 40), ConfigError);
    EXPECT_NO_THROW(build_interference(p, u, InterferenceMode::streamed, SeedTree(1), 40));
}

TEST(Step, InteractionFreeIsExact) {
    StructuralParams p = interaction_free();
    p.noise_sd = 0.0;
    const auto u = alternating(6);
    const auto h = build_interference(p, u, InterferenceMode::streamed, SeedTree(1));
    const std::vector<double> y_prev{3.0, -1.0, 0.5, 2.0, 7.0, 0.0};
    const std::vector<std::uint8_t> w{1, 1, 0, 0, 1, 0};
    const auto shocks = draw_round_shocks(6, 1, SeedTree(1));
    const auto y = step(y_prev, w, u, h, p, 0.0, shocks);
    for (std::size_t i = 0; i < 6; ++i) {
        const double expected = (u[i] ? p.delta_h : p.delta_a) + (u[i] ? p.tau_h : p.tau_a) * w[i];
        EXPECT_EQ(y[i], expected);
    }
}

TEST(Step, RejectsLengthMismatch) {
    StructuralParams p;
    const auto u = alternating(4);
    const auto h = build_interference(p, u, InterferenceMode::streamed, SeedTree(1));
    const auto shocks = draw_round_shocks(4, 1, SeedTree(1));
    EXPECT_THROW(step(std::vector<double>(3), std::vector<std::uint8_t>(4), u, h, p, 0.5, shocks), SimulationError);
}

TEST(ParallelWorlds, SharedWarmupAndShape) {
    const auto cfg = cfg_of(200, 4, 12, 3);
    StructuralParams p;
    const auto w = simulate_worlds(cfg, p, {}, TreatmentPlan::experiment(cfg));
    for (int t = 0; t <= 4; ++t) {
        const auto c = w.control.y.col(static_cast<std::size_t>(t));
        const auto tr = w.treatment.y.col(static_cast<std::size_t>(t));
        const auto e = w.experiment.y.col(static_cast<std::size_t>(t));
        EXPECT_TRUE(std::equal(c.begin(), c.end(), tr.begin()));
        EXPECT_TRUE(std::equal(c.begin(), c.end(), e.begin()));
    }
    EXPECT_EQ(w.control.scenario, Scenario::control);
    EXPECT_EQ(w.treatment.scenario, Scenario::treatment);
    EXPECT_EQ(w.experiment.scenario, Scenario::experiment);
    for (std::size_t i = 0; i < 200; ++i) EXPECT_EQ(w.treatment.w(i, 5), 1);
}

TEST(ParallelWorlds, Deterministic) {
    const auto cfg = cfg_of(150, 2, 5, 8);
    StructuralParams p;
    p.sigma_fixed = 0.5;
    const auto a = simulate_worlds(cfg, p, {}, TreatmentPlan::experiment(cfg));
    const auto b = simulate_worlds(cfg, p, {}, TreatmentPlan::experiment(cfg));
    EXPECT_EQ(a.experiment.y, b.experiment.y);
    EXPECT_EQ(a.experiment.w, b.experiment.w);
    EXPECT_EQ(a.types.q, b.types.q);
}

TEST(ParallelWorlds, OpposingEffectsSign) {
    const auto cfg = cfg_of(2000, 4, 12, 1);
    StructuralParams p;   // tau_h = 1, tau_a = -0.8
    const auto w = simulate_worlds(cfg, p, {}, TreatmentPlan::experiment(cfg));
    const auto tte = ground_truth_tte(w);
    const auto analytic = analytic_tte_h(reduce_params(p, 0.5), 0.5, p.init_mean, cfg.horizon(), {cfg.t_warmup + 1});
    for (int t = cfg.t_warmup + 1; t <= cfg.horizon(); ++t) {
        EXPECT_GT(tte[t], 0.0);
        EXPECT_GT(analytic[t], 0.0);
    }
}

TEST(GroundTruth, IdenticalWorldsGiveZero) {
    const auto cfg = cfg_of(100, 2, 4, 2);
    StructuralParams p;
    auto w = simulate_worlds(cfg, p, {}, TreatmentPlan::experiment(cfg));
    w.treatment = w.control;
    const auto g = ground_truth_tte(w);
    for (int t = 0; t <= g.horizon(); ++t) EXPECT_EQ(g[t], 0.0);
}

TEST(GroundTruth, InteractionFreeEqualsDirectEffect) {
    const auto cfg = cfg_of(300, 3, 6, 4);
    const StructuralParams p = interaction_free();
    const auto w = simulate_worlds(cfg, p, {}, TreatmentPlan::experiment(cfg));
    const auto g = ground_truth_tte(w);
    for (int t = 1; t <= cfg.t_warmup; ++t) EXPECT_EQ(g[t], 0.0);
    for (int t = cfg.t_warmup + 1; t <= cfg.horizon(); ++t) EXPECT_NEAR(g[t], p.tau_h, 1e-12);
}

TEST(GroundTruth, CommonRandomNumbersCancelExactly) {
    const auto cfg = cfg_of(400, 4, 8, 6);
    StructuralParams p;
    p.tau_h = p.tau_a = 0.0;
    p.alpha = p.gamma = 0.0;
    p.sigma_fixed = 0.8;
    const auto w = simulate_worlds(cfg, p, {}, TreatmentPlan::experiment(cfg));
    const auto g = ground_truth_tte(w);
    const auto a = type_effect(w, 0);
    for (int t = 0; t <= cfg.horizon(); ++t) {
        EXPECT_EQ(g[t], 0.0);
        EXPECT_EQ(a[t], 0.0);
    }
}

TEST(GroundTruth, NoHumansIsAnError) {
    auto cfg = cfg_of(50, 1, 3, 0);
    cfg.human_fraction = 0.0;
    const auto w = simulate_worlds(cfg, StructuralParams{}, {}, TreatmentPlan::experiment(cfg));
    EXPECT_THROW(ground_truth_tte(w), SimulationError);
    EXPECT_NO_THROW(type_effect(w, 0));
}

// Sample means of the whole population track the population recursion.
TEST(StateEvolution, SampleMeansTrackRecursion) {
    const auto cfg = cfg_of(20000, 4, 12, 12);
    StructuralParams p;
    p.sigma_fixed = 0.0;
    const auto plan = TreatmentPlan::experiment(cfg);
    const auto w = simulate_worlds(cfg, p, {}, plan);
    const auto nu = ese_population(reduce_params(p, 0.5), 0.5, plan.pi_schedule, p.init_mean).nu;
    for (int t = 1; t <= cfg.horizon(); ++t)
        EXPECT_NEAR(mean_of(w.experiment.y.col(static_cast<std::size_t>(t))), nu[static_cast<std::size_t>(t)], 0.05);
}

// Fixed Gaussian interference and unequal type means: seed-averaged
// deviations from the recursion stay near zero.
TEST(StateEvolution, FixedInterferenceComponentIsUnbiased) {
    StructuralParams p;
    p.sigma_fixed = 1.0;
    p.mu_h = 1.4;
    p.mu_a = 0.6;
    const int seeds = 10;
    const auto base = cfg_of(3000, 4, 12, 0);
    std::vector<double> bias(static_cast<std::size_t>(base.horizon()) + 1, 0.0);
    const auto plan = TreatmentPlan::experiment(base);
    const auto nu = ese_population(reduce_params(p, 0.5), 0.5, plan.pi_schedule, p.init_mean).nu;
    for (int s = 0; s < seeds; ++s) {
        const auto cfg = cfg_of(3000, 4, 12, 500 + static_cast<std::uint64_t>(s));
        const auto w = simulate_worlds(cfg, p, {}, plan, InterferenceMode::dense);
        for (int t = 1; t <= cfg.horizon(); ++t) {
            const auto ut = static_cast<std::size_t>(t);
            bias[ut] += (mean_of(w.experiment.y.col(ut)) - nu[ut]) / seeds;
        }
    }
    for (int t = 1; t <= base.horizon(); ++t) EXPECT_NEAR(bias[static_cast<std::size_t>(t)], 0.0, 0.04) << t;
}

TEST(RunParallelWorlds, RejectsMismatchedPlan) {
    const auto cfg = cfg_of(50, 2, 4, 0);
    StructuralParams p;
    const SeedTree seeds(0);
    const auto types = draw_types(cfg, {}, seeds);
    const auto h = build_interference(p, types.u, InterferenceMode::streamed, seeds);
    auto other = cfg_of(50, 1, 5, 0);
    EXPECT_THROW(run_parallel_worlds(cfg, p, types, h, TreatmentPlan::experiment(other), seeds), ConfigError);
}
