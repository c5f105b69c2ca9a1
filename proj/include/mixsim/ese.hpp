#pragma once
// Experimental state evolution: the deterministic large-population limit of
// sample-mean outcomes, for the whole population and for a subpopulation with
// composition q^S and treatment path pi^S.

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "mixsim/core_model.hpp"

namespace mixsim {

inline constexpr double kDivergenceCap = 1e6;

struct ThetaReduced {
    double delta_h = 0.0;
    double delta_a = 0.0;
    double tau_h = 0.0;
    double tau_a = 0.0;
    double alpha_bar = 0.0;
    double beta_bar = 0.0;
    double gamma_bar = 0.0;

    std::array<double, 7> as_array() const {
        return {delta_h, delta_a, tau_h, tau_a, alpha_bar, beta_bar, gamma_bar};
    }
    static ThetaReduced from_array(const std::array<double, 7>& a) {
        return {a[0], a[1], a[2], a[3], a[4], a[5], a[6]};
    }
    bool finite() const {
        for (double v : as_array())
            if (!std::isfinite(v)) return false;
        return true;
    }
};

// mu_bar = mu_h q_bar + mu_a (1 - q_bar) scales the interaction coefficients.
inline ThetaReduced reduce_params(const StructuralParams& p, double q_bar) {
    detail::require(q_bar >= 0.0 && q_bar <= 1.0, "q_bar must lie in [0,1]");
    const double mu_bar = p.mu_h * q_bar + p.mu_a * (1.0 - q_bar);
    return {p.delta_h, p.delta_a, p.tau_h, p.tau_a, mu_bar * p.alpha, mu_bar * p.beta, mu_bar * p.gamma};
}

// F(nu, pi^S, q^S, pi; theta)
inline double ese_step(double nu_prev, double pi_s, double q_s, double pi_pop, const ThetaReduced& th) {
    if (!std::isfinite(nu_prev) || !std::isfinite(pi_s) || !std::isfinite(q_s) || !std::isfinite(pi_pop))
        throw SimulationError("ese_step: non-finite input");
    return th.delta_h * q_s + th.delta_a * (1.0 - q_s) + (th.tau_h * q_s + th.tau_a * (1.0 - q_s)) * pi_s +
           th.alpha_bar * pi_pop + th.beta_bar * nu_prev + th.gamma_bar * pi_pop * nu_prev;
}

// nu has T+1 entries (round 0..T); pi[t] is the rate used in round t with
// pi[0] unused (kept at 0).
struct ESETrajectory {
    std::vector<double> nu;
    std::vector<double> pi;
    double q_bar = 0.0;

    int horizon() const noexcept { return static_cast<int>(nu.size()) - 1; }
};

namespace detail {

inline void check_cap(double v, int t, double cap) {
    if (!std::isfinite(v) || std::abs(v) > cap)
        throw DivergenceError("state evolution diverged at round " + std::to_string(t));
}

inline std::vector<double> with_round_zero(std::span<const double> path) {
    std::vector<double> out(path.size() + 1, 0.0);
    std::copy(path.begin(), path.end(), out.begin() + 1);
    return out;
}

}  // namespace detail

// Population recursion: nu_t = F(nu_{t-1}, pi_t, q_bar, pi_t).
// pi_path[t-1] is the population rate of round t.
inline ESETrajectory ese_population(const ThetaReduced& th, double q_bar, std::span<const double> pi_path,
                                    double nu0, double cap = kDivergenceCap) {
    ESETrajectory tr;
    tr.q_bar = q_bar;
    tr.pi = detail::with_round_zero(pi_path);
    tr.nu.assign(pi_path.size() + 1, 0.0);
    tr.nu[0] = nu0;
    for (std::size_t t = 1; t < tr.nu.size(); ++t) {
        tr.nu[t] = ese_step(tr.nu[t - 1], tr.pi[t], q_bar, tr.pi[t], th);
        detail::check_cap(tr.nu[t], static_cast<int>(t), cap);
    }
    return tr;
}

// Subpopulation recursion; the memory argument is the population trajectory.
inline ESETrajectory ese_trajectory(const ThetaReduced& th, double q_bar, double q_s,
                                    std::span<const double> pi_s_path, std::span<const double> pi_pop_path,
                                    double nu0, double cap = kDivergenceCap) {
    if (pi_s_path.size() != pi_pop_path.size())
        throw ConfigError("ese_trajectory: path lengths differ");
    const ESETrajectory pop = ese_population(th, q_bar, pi_pop_path, nu0, cap);
    ESETrajectory tr;
    tr.q_bar = q_s;
    tr.pi = detail::with_round_zero(pi_s_path);
    tr.nu.assign(pi_s_path.size() + 1, 0.0);
    tr.nu[0] = nu0;
    for (std::size_t t = 1; t < tr.nu.size(); ++t) {
        tr.nu[t] = ese_step(pop.nu[t - 1], tr.pi[t], q_s, pop.pi[t], th);
        detail::check_cap(tr.nu[t], static_cast<int>(t), cap);
    }
    return tr;
}

// Which state carries memory in the human counterfactual readout.
enum class HumanMemory {
    population,  // F(nu^(w)_{t-1}, w, 1, w): the population counterfactual path
    own,         // F(nu^(w)_{H,t-1}, w, 1, w): the human path itself
};

struct CounterfactualOptions {
    int treat_start = 1;   // first round of the all-treated arm; earlier rounds are control in both arms
    HumanMemory human_memory = HumanMemory::population;
    double cap = kDivergenceCap;
};

inline std::vector<double> counterfactual_schedule(int t_max, int treat_start, double level) {
    std::vector<double> pi(static_cast<std::size_t>(t_max), 0.0);
    for (int t = std::max(treat_start, 1); t <= t_max; ++t) pi[static_cast<std::size_t>(t - 1)] = level;
    return pi;
}

// Human total treatment effect implied by theta: all-treated minus all-control
// human trajectories, built from the population and subpopulation recursions
// with q^S = 1.
inline EffectSeries analytic_tte_h(const ThetaReduced& th, double q_bar, double nu0, int t_max,
                                   const CounterfactualOptions& opt = {}) {
    const auto pi1 = counterfactual_schedule(t_max, opt.treat_start, 1.0);
    const auto pi0 = counterfactual_schedule(t_max, opt.treat_start, 0.0);
    EffectSeries out(t_max);
    if (opt.human_memory == HumanMemory::population) {
        const auto h1 = ese_trajectory(th, q_bar, 1.0, pi1, pi1, nu0, opt.cap);
        const auto h0 = ese_trajectory(th, q_bar, 1.0, pi0, pi0, nu0, opt.cap);
        for (int t = 1; t <= t_max; ++t) out[t] = h1.nu[static_cast<std::size_t>(t)] - h0.nu[static_cast<std::size_t>(t)];
    } else {
        // With the human path as its own memory the recursion is the
        // population recursion evaluated at q_bar = 1.
        const auto h1 = ese_population(th, 1.0, pi1, nu0, opt.cap);
        const auto h0 = ese_population(th, 1.0, pi0, nu0, opt.cap);
        for (int t = 1; t <= t_max; ++t) out[t] = h1.nu[static_cast<std::size_t>(t)] - h0.nu[static_cast<std::size_t>(t)];
    }
    return out;
}

// Same construction for an arbitrary readout composition (0 = AI units,
// q_bar = whole population).
inline EffectSeries analytic_effect(const ThetaReduced& th, double q_bar, double q_readout, double nu0, int t_max,
                                    const CounterfactualOptions& opt = {}) {
    const auto pi1 = counterfactual_schedule(t_max, opt.treat_start, 1.0);
    const auto pi0 = counterfactual_schedule(t_max, opt.treat_start, 0.0);
    const auto r1 = ese_trajectory(th, q_bar, q_readout, pi1, pi1, nu0, opt.cap);
    const auto r0 = ese_trajectory(th, q_bar, q_readout, pi0, pi0, nu0, opt.cap);
    EffectSeries out(t_max);
    for (int t = 1; t <= t_max; ++t) out[t] = r1.nu[static_cast<std::size_t>(t)] - r0.nu[static_cast<std::size_t>(t)];
    return out;
}

}  // namespace mixsim
