#include <gtest/gtest.h>

#include <random>

#include "mixsim/ese.hpp"

using namespace mixsim;

namespace {

const ThetaReduced kBench{0.5, -0.2, 1.0, -0.8, 0.3, 0.5, 0.1};

ThetaReduced random_theta(Engine& eng) {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    return {d(eng), d(eng), d(eng), d(eng), d(eng), 0.4 * d(eng), 0.4 * d(eng)};
}

}  // namespace

TEST(ReduceParams, UnitMeansLeaveCoefficients) {
    StructuralParams p;
    p.mu_h = p.mu_a = 1.0;
    const auto th = reduce_params(p, 0.37);
    EXPECT_EQ(th.alpha_bar, p.alpha);
    EXPECT_EQ(th.beta_bar, p.beta);
    EXPECT_EQ(th.gamma_bar, p.gamma);
}

TEST(ReduceParams, MixedMeans) {
    StructuralParams p;
    p.mu_h = 2.0;
    p.mu_a = 0.0;
    p.alpha = 0.3;
    EXPECT_DOUBLE_EQ(reduce_params(p, 0.5).alpha_bar, 0.3);
    EXPECT_DOUBLE_EQ(reduce_params(p, 1.0).beta_bar, 2.0 * p.beta);
    EXPECT_THROW(reduce_params(p, 1.2), ConfigError);
}

TEST(EseStep, CompositionDropsOutForEqualTypes) {
    const ThetaReduced th{1.0, 1.0, 2.0, 2.0, 0.0, 0.0, 0.0};
    for (double q : {0.0, 0.3, 1.0})
        for (double nu : {-1.0, 4.0}) EXPECT_DOUBLE_EQ(ese_step(nu, 0.5, q, 0.7, th), 2.0);
}

TEST(EseStep, TermByTerm) {
    // 0.5*0.6 - 0.2*0.4 = 0.22; (0.6 - 0.32)*0.5 = 0.14; 0.15 + 0.5 + 0.05 = 0.70
    EXPECT_NEAR(ese_step(1.0, 0.5, 0.6, 0.5, kBench), 1.06, 1e-15);
}

TEST(EseStep, NoTreatmentNoMemory) {
    ThetaReduced th = kBench;
    th.beta_bar = th.gamma_bar = 0.0;
    EXPECT_DOUBLE_EQ(ese_step(3.0, 0.0, 0.25, 0.0, th), 0.5 * 0.25 - 0.2 * 0.75);
}

TEST(EseStep, LinearInTheta) {
    Engine eng(3);
    for (int k = 0; k < 50; ++k) {
        const auto a = random_theta(eng), b = random_theta(eng);
        const auto aa = a.as_array(), ba = b.as_array();
        std::array<double, 7> sum{};
        for (std::size_t i = 0; i < 7; ++i) sum[i] = 2.0 * aa[i] - 0.5 * ba[i];
        const double lhs = ese_step(0.7, 0.3, 0.4, 0.6, ThetaReduced::from_array(sum));
        const double rhs = 2.0 * ese_step(0.7, 0.3, 0.4, 0.6, a) - 0.5 * ese_step(0.7, 0.3, 0.4, 0.6, b);
        EXPECT_NEAR(lhs, rhs, 1e-12);
    }
}

TEST(EseStep, ConstantInCompositionWhenTypesCoincide) {
    Engine eng(5);
    std::uniform_real_distribution<double> d(0.0, 1.0);
    for (int k = 0; k < 100; ++k) {
        auto th = random_theta(eng);
        th.delta_a = th.delta_h;
        th.tau_a = th.tau_h;
        const double nu = 3.0 * d(eng) - 1.0, ps = d(eng), p = d(eng);
        EXPECT_NEAR(ese_step(nu, ps, d(eng), p, th), ese_step(nu, ps, d(eng), p, th), 1e-14);
    }
}

TEST(EseStep, RejectsNonFinite) { EXPECT_THROW(ese_step(std::nan(""), 0.1, 0.1, 0.1, kBench), SimulationError); }

TEST(EseTrajectory, MemorylessWithoutPersistence) {
    ThetaReduced th = kBench;
    th.beta_bar = th.gamma_bar = 0.0;
    const std::vector<double> ps{0.2, 0.2, 0.9, 0.2}, pp{0.5, 0.5, 0.5, 0.5};
    const auto tr = ese_trajectory(th, 0.5, 0.4, ps, pp, 10.0);
    EXPECT_DOUBLE_EQ(tr.nu[1], tr.nu[2]);
    EXPECT_DOUBLE_EQ(tr.nu[1], tr.nu[4]);
    EXPECT_NE(tr.nu[1], tr.nu[3]);
}

TEST(EseTrajectory, ConvergesToFixedPoint) {
    const double pi = 0.5, q = 0.5;
    const std::vector<double> path(200, pi);
    const auto tr = ese_population(kBench, q, path, 0.0);
    // nu* = c / (1 - beta - gamma pi)
    const double c = kBench.delta_h * q + kBench.delta_a * (1 - q) + (kBench.tau_h * q + kBench.tau_a * (1 - q)) * pi +
                     kBench.alpha_bar * pi;
    const double fixed = c / (1.0 - kBench.beta_bar - kBench.gamma_bar * pi);
    EXPECT_NEAR(tr.nu.back(), fixed, 1e-12);
    EXPECT_LT(std::abs(tr.nu[20] - fixed), std::abs(tr.nu[10] - fixed));
}

TEST(EseTrajectory, HumanMinusAiGap) {
    ThetaReduced th = kBench;
    th.beta_bar = th.gamma_bar = 0.0;
    const std::vector<double> ps{0.1, 0.6, 0.3}, pp{0.2, 0.2, 0.4};
    const auto h = ese_trajectory(th, 0.5, 1.0, ps, pp, 0.0);
    const auto a = ese_trajectory(th, 0.5, 0.0, ps, pp, 0.0);
    for (std::size_t t = 1; t <= 3; ++t)
        EXPECT_NEAR(h.nu[t] - a.nu[t], (th.delta_h - th.delta_a) + (th.tau_h - th.tau_a) * ps[t - 1], 1e-14);
}

TEST(EseTrajectory, EqualInputsEqualTrajectories) {
    const std::vector<double> ps{0.1, 0.6, 0.3}, pp{0.2, 0.2, 0.4};
    EXPECT_EQ(ese_trajectory(kBench, 0.4, 0.7, ps, pp, 1.0).nu, ese_trajectory(kBench, 0.4, 0.7, ps, pp, 1.0).nu);
}

TEST(EseTrajectory, LengthMismatchAndDivergence) {
    EXPECT_THROW(ese_trajectory(kBench, 0.5, 0.5, std::vector<double>{0.1}, std::vector<double>{0.1, 0.2}, 0.0),
                 ConfigError);
    ThetaReduced th = kBench;
    th.beta_bar = 3.0;
    EXPECT_THROW(ese_population(th, 0.5, std::vector<double>(100, 0.5), 1.0), DivergenceError);
}

TEST(AnalyticTte, NoTreatmentChannel) {
    ThetaReduced th = kBench;
    th.tau_h = th.tau_a = th.alpha_bar = th.gamma_bar = 0.0;
    const auto e = analytic_tte_h(th, 0.5, 1.0, 10);
    for (int t = 0; t <= 10; ++t) EXPECT_EQ(e[t], 0.0);
}

TEST(AnalyticTte, DirectEffectOnly) {
    ThetaReduced th = kBench;
    th.alpha_bar = th.beta_bar = th.gamma_bar = 0.0;
    const auto e = analytic_tte_h(th, 0.5, 1.0, 10);
    for (int t = 1; t <= 10; ++t) EXPECT_NEAR(e[t], th.tau_h, 1e-15);
}

TEST(AnalyticTte, TreatStartDelaysEffect) {
    const auto e = analytic_tte_h(kBench, 0.5, 0.0, 16, {5});
    for (int t = 1; t <= 4; ++t) EXPECT_EQ(e[t], 0.0);
    EXPECT_GT(e[5], 0.0);
}

// Hand recursion of the listing: population paths at q_bar, human readout
// with population memory.
TEST(AnalyticTte, MatchesHandRecursion) {
    const double q = 0.5, nu0 = 0.3;
    const auto e = analytic_tte_h(kBench, q, nu0, 6);
    double p1 = nu0, p0 = nu0;
    for (int t = 1; t <= 6; ++t) {
        const double h1 = ese_step(p1, 1.0, 1.0, 1.0, kBench);
        const double h0 = ese_step(p0, 0.0, 1.0, 0.0, kBench);
        EXPECT_NEAR(e[t], h1 - h0, 1e-14);
        p1 = ese_step(p1, 1.0, q, 1.0, kBench);
        p0 = ese_step(p0, 0.0, q, 0.0, kBench);
    }
}

TEST(AnalyticTte, MemoryChoiceIrrelevantWithoutPersistence) {
    ThetaReduced th = kBench;
    th.beta_bar = th.gamma_bar = 0.0;
    const auto a = analytic_tte_h(th, 0.5, 0.0, 8, {1, HumanMemory::population});
    const auto b = analytic_tte_h(th, 0.5, 0.0, 8, {1, HumanMemory::own});
    for (int t = 1; t <= 8; ++t) EXPECT_NEAR(a[t], b[t], 1e-15);
    const auto c = analytic_tte_h(kBench, 0.5, 0.0, 8, {1, HumanMemory::own});
    const auto d = analytic_tte_h(kBench, 0.5, 0.0, 8, {1, HumanMemory::population});
    EXPECT_NE(c[8], d[8]);
}
