#include <gtest/gtest.h>

#include <numeric>

#include "mixsim/dynamics.hpp"
#include "mixsim/estimator.hpp"
#include "test_support.hpp"

using namespace mixsim;
using mixsim::testing::fill_ese_outcomes;
using mixsim::testing::grouped_panel;
using mixsim::testing::small_config;

namespace {

const ThetaReduced kTheta{0.5, -0.2, 1.0, -0.8, 0.3, 0.5, 0.1};

// Three constant-prior groups, benchmark-like phases, outcomes generated
// exactly from the recursion.
struct ExactSetup {
    Panel panel;
    std::vector<Subpopulation> batches;
};

ExactSetup exact_setup(const ThetaReduced& th, std::uint64_t seed = 1) {
    const auto cfg = small_config(180, 4, 12, seed);
    ExactSetup s{grouped_panel({0.2, 0.5, 0.8}, 60, TreatmentPlan::experiment(cfg), seed), {}};
    fill_ese_outcomes(s.panel, th, 0.3);
    BatchOptions opt;
    opt.min_size = 5;
    opt.duration_from = cfg.t_warmup + 1;
    s.batches = construct_subpopulations(s.panel.q, s.panel.w, opt, SeedTree(seed));
    return s;
}

SubpopSummary summary(double q, std::vector<double> pi, std::vector<double> y) {
    SubpopSummary s;
    s.q_k = q;
    s.pi_path = std::move(pi);
    s.y_path = std::move(y);
    return s;
}

}  // namespace

TEST(Design, RowCount) {
    const auto b = summary(0.5, {0, 0.2, 0.4, 0.6}, {0, 1, 2, 3});
    const PopulationSummary pop{0.5, {0, 0.2, 0.4, 0.6}, {0, 1, 2, 3}};
    const auto d = build_design({b}, pop, {1, 3});
    EXPECT_EQ(d.x.rows(), 3);
    EXPECT_EQ(d.x.cols(), 7);
    EXPECT_DOUBLE_EQ(d.x(1, 6), 0.4 * 1.0);
    EXPECT_THROW(build_design({b}, pop, {0, 3}), ConfigError);
}

TEST(Design, ConstantCompositionCollapses) {
    auto s = exact_setup(kTheta);
    for (auto& q : s.panel.q) q = 0.4;
    const auto sm = summarize(s.panel, s.batches);
    const auto fit = fit_theta(build_design(sm.batches, sm.population));
    EXPECT_LE(fit.design_rank, 5);
    EXPECT_TRUE(fit.rank_deficient);
}

TEST(Design, NoiselessResponseIsExact) {
    const auto s = exact_setup(kTheta);
    const auto sm = summarize(s.panel, s.batches);
    const auto d = build_design(sm.batches, sm.population);
    const auto a = kTheta.as_array();
    Eigen::VectorXd v(7);
    for (int i = 0; i < 7; ++i) v(i) = a[static_cast<std::size_t>(i)];
    EXPECT_LT((d.x * v - d.y).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Fit, ExactRecovery) {
    const auto s = exact_setup(kTheta);
    const auto sm = summarize(s.panel, s.batches);
    ASSERT_TRUE(check_identifiability(sm.batches, sm.population).pass());
    const auto fit = fit_theta(build_design(sm.batches, sm.population));
    EXPECT_EQ(fit.design_rank, 7);
    EXPECT_FALSE(fit.rank_deficient);
    const auto got = fit.theta_hat.as_array(), want = kTheta.as_array();
    for (std::size_t i = 0; i < 7; ++i) EXPECT_NEAR(got[i], want[i], 1e-8) << "coefficient " << i;
}

TEST(Fit, ZeroResponse) {
    auto s = exact_setup(kTheta);
    const auto sm = summarize(s.panel, s.batches);
    auto d = build_design(sm.batches, sm.population);
    d.y.setZero();
    for (double v : fit_theta(d).theta_hat.as_array()) EXPECT_EQ(v, 0.0);
}

TEST(Fit, TooFewRows) {
    const auto b = summary(0.5, {0, 0.2, 0.4, 0.6}, {0, 1, 2, 3});
    const PopulationSummary pop{0.5, {0, 0.2, 0.4, 0.6}, {0, 1, 2, 3}};
    EXPECT_THROW(fit_theta(build_design({b}, pop)), EstimationError);
}

TEST(Fit, SingleStratumIsRankDeficient) {
    const auto cfg = small_config(120, 4, 12, 3);
    auto p = grouped_panel({0.6}, 120, TreatmentPlan::experiment(cfg), 3);
    fill_ese_outcomes(p, kTheta, 0.0);
    BatchOptions opt;
    opt.n_strata = 1;
    opt.min_size = 5;
    const auto b = construct_subpopulations(p.q, p.w, opt, SeedTree(3));
    const auto sm = summarize(p, b);
    EXPECT_TRUE(fit_theta(build_design(sm.batches, sm.population)).rank_deficient);
}

TEST(Identifiability, TwoStrataTwoPhases) {
    const std::vector<double> pi{0, 0.2, 0.2, 0.8, 0.8};
    const std::vector<double> y{0, 1, 2, 1.5, 3};
    const PopulationSummary pop{0.5, pi, y};
    const auto r = check_identifiability({summary(0.2, pi, y), summary(0.8, pi, y)}, pop);
    EXPECT_TRUE(r.cross_variation);
    ASSERT_TRUE(r.witness.has_value());
    EXPECT_DOUBLE_EQ(r.witness->q_low, 0.2);
    EXPECT_DOUBLE_EQ(r.witness->q_high, 0.8);
    EXPECT_DOUBLE_EQ(r.witness->p_low, 0.2);
    EXPECT_DOUBLE_EQ(r.witness->p_high, 0.8);
    // det of rows [1, q, p, qp] over the 2x2 grid = (dq dp)^2
    EXPECT_NEAR(std::abs(r.witness->z4_det), std::pow(0.6 * 0.6, 2), 1e-12);
    EXPECT_TRUE(r.temporal_ok);
}

TEST(Identifiability, SingleCompositionFails) {
    const std::vector<double> pi{0, 0.2, 0.2, 0.8, 0.8};
    const std::vector<double> y{0, 1, 2, 1.5, 3};
    const PopulationSummary pop{0.5, pi, y};
    EXPECT_FALSE(check_identifiability({summary(0.5, pi, y), summary(0.52, pi, y)}, pop).cross_variation);
}

TEST(Identifiability, ConstantRateFailsTemporal) {
    const std::vector<double> pi{0, 0.5, 0.5, 0.5, 0.5};
    const std::vector<double> y{0, 1, 2, 1.5, 3};
    const auto r = check_identifiability({summary(0.2, pi, y)}, {0.5, pi, y});
    EXPECT_FALSE(r.temporal_ok);
    EXPECT_LE(r.temporal_rank, 2);
    EXPECT_FALSE(r.pass());
}

TEST(Identifiability, BenchmarkDesignPasses) {
    const auto cfg = small_config(200, 4, 12, 0);
    const auto worlds = simulate_worlds(cfg, StructuralParams{}, {}, TreatmentPlan::experiment(cfg));
    BatchOptions opt;
    opt.duration_from = cfg.t_warmup + 1;
    const auto b = construct_subpopulations(worlds.experiment.q, worlds.experiment.w, opt, SeedTree(0));
    const auto sm = summarize(worlds.experiment, b);
    EXPECT_TRUE(check_identifiability(sm.batches, sm.population).pass());
}

TEST(Propagate, NoTreatmentChannel) {
    ThetaReduced th = kTheta;
    th.tau_h = th.tau_a = th.alpha_bar = th.gamma_bar = 0.0;
    const auto p = propagate_counterfactuals(th, 0.5, 1.0, 10);
    for (int t = 0; t <= 10; ++t) EXPECT_EQ(p.tte_h[t], 0.0);
}

TEST(Propagate, DirectOnly) {
    ThetaReduced th = kTheta;
    th.alpha_bar = th.beta_bar = th.gamma_bar = 0.0;
    const auto p = propagate_counterfactuals(th, 0.5, 1.0, 10);
    EXPECT_EQ(p.tte_h[0], 0.0);
    for (int t = 1; t <= 10; ++t) EXPECT_NEAR(p.tte_h[t], th.tau_h, 1e-15);
}

TEST(Propagate, MatchesAnalytic) {
    for (auto mem : {HumanMemory::population, HumanMemory::own})
        for (int start : {1, 5}) {
            const CounterfactualOptions opt{start, mem};
            const auto p = propagate_counterfactuals(kTheta, 0.45, 0.2, 16, opt);
            const auto a = analytic_tte_h(kTheta, 0.45, 0.2, 16, opt);
            for (int t = 0; t <= 16; ++t) EXPECT_NEAR(p.tte_h[t], a[t], 1e-12);
        }
}

TEST(Propagate, NonFinite) {
    EXPECT_THROW(propagate_counterfactuals(kTheta, 0.5, std::nan(""), 4), EstimationError);
}

TEST(Estimate, ExactRecoveryEndToEnd) {
    const auto s = exact_setup(kTheta, 4);
    const auto est = estimate_tte_h(s.panel, s.batches);
    EXPECT_TRUE(est.warnings.empty());
    const auto a = analytic_tte_h(kTheta, mean_of(s.panel.q), 0.3, s.panel.horizon());
    for (int t = 0; t <= s.panel.horizon(); ++t) EXPECT_NEAR(est.effect[t], a[t], 1e-8);
}

TEST(Estimate, PermutationInvariance) {
    const auto s = exact_setup(kTheta, 5);
    auto panel = s.panel;
    for (std::size_t i = 0; i < panel.n_units(); ++i)
        for (std::size_t t = 0; t < panel.y.cols(); ++t) panel.y(i, t) += 0.05 * std::sin(double(i * 7 + t));
    const std::size_t n = panel.n_units();
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), Engine(6));
    Panel moved(n, panel.horizon());
    moved.t_warmup = panel.t_warmup;
    for (std::size_t i = 0; i < n; ++i) {
        moved.q[perm[i]] = panel.q[i];
        for (std::size_t t = 0; t < panel.y.cols(); ++t) {
            moved.y(perm[i], t) = panel.y(i, t);
            moved.w(perm[i], t) = panel.w(i, t);
        }
    }
    auto batches = s.batches;
    for (auto& b : batches) {
        for (auto& i : b.indices) i = perm[i];
        std::sort(b.indices.begin(), b.indices.end());
    }
    const auto e1 = estimate_tte_h(panel, s.batches);
    const auto e2 = estimate_tte_h(moved, batches);
    const auto a1 = e1.fit.theta_hat.as_array(), a2 = e2.fit.theta_hat.as_array();
    for (std::size_t i = 0; i < 7; ++i) EXPECT_NEAR(a1[i], a2[i], 1e-9);
    for (int t = 0; t <= panel.horizon(); ++t) EXPECT_NEAR(e1.effect[t], e2.effect[t], 1e-9);
}

TEST(Estimate, ScaleEquivariance) {
    const auto s = exact_setup(kTheta, 6);
    auto panel = s.panel;
    for (std::size_t i = 0; i < panel.n_units(); ++i)
        for (std::size_t t = 0; t < panel.y.cols(); ++t) panel.y(i, t) += 0.05 * std::cos(double(i + 3 * t));
    auto scaled = panel;
    const double c = 2.5;
    for (std::size_t i = 0; i < panel.n_units(); ++i)
        for (std::size_t t = 0; t < panel.y.cols(); ++t) scaled.y(i, t) *= c;
    const auto e1 = estimate_tte_h(panel, s.batches);
    const auto e2 = estimate_tte_h(scaled, s.batches);
    for (int t = 0; t <= panel.horizon(); ++t) EXPECT_NEAR(e2.effect[t], c * e1.effect[t], 1e-8);
    const auto a1 = e1.fit.theta_hat.as_array(), a2 = e2.fit.theta_hat.as_array();
    for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(a2[i], c * a1[i], 1e-8);
    EXPECT_NEAR(a2[5], a1[5], 1e-9);
    EXPECT_NEAR(a2[6], a1[6], 1e-9);
}

TEST(Estimate, StrictModeRejectsDeficientDesign) {
    auto s = exact_setup(kTheta, 7);
    for (auto& q : s.panel.q) q = 0.4;
    EstimatorOptions opt;
    EXPECT_NO_THROW({
        const auto est = estimate_tte_h(s.panel, s.batches, opt);
        EXPECT_FALSE(est.warnings.empty());
    });
    opt.strict = true;
    EXPECT_THROW(estimate_tte_h(s.panel, s.batches, opt), IdentifiabilityError);
}
