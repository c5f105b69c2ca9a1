#pragma once
// Simulator for the type-dependent interference outcome model:
//
//   Y_it = delta(u_i) + tau(u_i) W_it + sum_j (A_ij + A^t_ij) g_j + e_it,
//   g_j  = alpha W_jt + beta Y_j,t-1 + gamma W_jt Y_j,t-1,
//
// with A_ij ~ N(mu(u_i)/N, sigma^2/N) fixed for the whole experiment and
// A^t_ij ~ N(0, sigma_t^2/N) fresh every round.

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mixsim/core_model.hpp"

namespace mixsim {

enum class InterferenceMode { dense, streamed };

inline constexpr std::size_t kDenseLimit = 20000;

// Realization of the fixed interference matrix A. Both modes draw row i of
// the Gaussian part from the substream (interference_row, i) and reduce rows
// in ascending column order, so dense and streamed results are bit-identical.
class InterferenceHandle {
public:
    InterferenceHandle() = default;

    InterferenceHandle(InterferenceMode mode, std::span<const std::uint8_t> u, double mu_h, double mu_a,
                       double sigma_fixed, const SeedTree& seeds)
        : mode_(mode), n_(u.size()), mu_h_(mu_h), mu_a_(mu_a), sigma_(sigma_fixed),
          row_seed_(seeds.derive(Stream::interference_row)) {
        receiver_mean_.resize(n_);
        for (std::size_t i = 0; i < n_; ++i) receiver_mean_[i] = u[i] ? mu_h : mu_a;
        if (mode_ == InterferenceMode::dense && sigma_ > 0.0) {
            dense_.resize(n_ * n_);
            for (std::size_t i = 0; i < n_; ++i) fill_row(i, {dense_.data() + i * n_, n_});
        }
    }

    InterferenceMode mode() const noexcept { return mode_; }
    std::size_t size() const noexcept { return n_; }
    double mu_h() const noexcept { return mu_h_; }
    double mu_a() const noexcept { return mu_a_; }
    double sigma_fixed() const noexcept { return sigma_; }

    // Gaussian deviation G_ij of row i (mean part excluded).
    void fill_row(std::size_t i, std::span<double> out) const {
        Engine eng(SeedTree(row_seed_).derive(Stream::interference_row, i));
        std::normal_distribution<double> dist(0.0, 1.0);
        const double scale = sigma_ / std::sqrt(static_cast<double>(n_));
        for (std::size_t j = 0; j < n_; ++j) out[j] = scale * dist(eng);
    }

    // A_ij for a single entry; intended for tests and diagnostics.
    double entry(std::size_t i, std::size_t j) const {
        std::vector<double> row(n_);
        row_deviation(i, row);
        return receiver_mean_[i] / static_cast<double>(n_) + row[j];
    }

    // out_i = sum_j A_ij g_j
    std::vector<double> apply(std::span<const double> g) const {
        if (g.size() != n_) throw SimulationError("interference input has wrong length");
        double g_sum = 0.0;
        for (double v : g) g_sum += v;
        const double g_mean = g_sum / static_cast<double>(n_);

        std::vector<double> out(n_);
        for (std::size_t i = 0; i < n_; ++i) out[i] = receiver_mean_[i] * g_mean;
        if (sigma_ == 0.0) return out;

        if (mode_ == InterferenceMode::dense) {
            for (std::size_t i = 0; i < n_; ++i) out[i] += dot({dense_.data() + i * n_, n_}, g);
        } else {
            std::vector<double> row(n_);
            for (std::size_t i = 0; i < n_; ++i) {
                fill_row(i, row);
                out[i] += dot(row, g);
            }
        }
        return out;
    }

private:
    static double dot(std::span<const double> a, std::span<const double> b) {
        double s = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
        return s;
    }

    void row_deviation(std::size_t i, std::span<double> out) const {
        if (sigma_ == 0.0) {
            std::fill(out.begin(), out.end(), 0.0);
        } else if (mode_ == InterferenceMode::dense) {
            std::copy_n(dense_.data() + i * n_, n_, out.begin());
        } else {
            fill_row(i, out);
        }
    }

    InterferenceMode mode_ = InterferenceMode::streamed;
    std::size_t n_ = 0;
    double mu_h_ = 0.0;
    double mu_a_ = 0.0;
    double sigma_ = 0.0;
    std::uint64_t row_seed_ = 0;
    std::vector<double> receiver_mean_;
    std::vector<double> dense_;
};

inline InterferenceHandle build_interference(const StructuralParams& params, std::span<const std::uint8_t> u,
                                             InterferenceMode mode, const SeedTree& seeds,
                                             std::size_t dense_limit = kDenseLimit) {
    detail::require(u.size() >= 2, "interference needs at least two units");
    if (mode == InterferenceMode::dense && params.sigma_fixed > 0.0 && u.size() > dense_limit)
        throw ConfigError("dense interference refused for N = " + std::to_string(u.size()) +
                          " (limit " + std::to_string(dense_limit) + "); use streamed mode");
    return InterferenceHandle(mode, u, params.mu_h, params.mu_a, params.sigma_fixed, seeds);
}

// Standard-normal deviates consumed by one round. Shared across the parallel
// worlds (common random numbers).
struct RoundShocks {
    std::vector<double> noise;
    std::vector<double> time;
};

inline RoundShocks draw_round_shocks(std::size_t n, int t, const SeedTree& seeds) {
    RoundShocks s{std::vector<double>(n), std::vector<double>(n)};
    Engine noise_eng = seeds.engine(Stream::noise, static_cast<std::uint64_t>(t));
    Engine time_eng = seeds.engine(Stream::time_noise, static_cast<std::uint64_t>(t));
    std::normal_distribution<double> dist(0.0, 1.0);
    for (auto& v : s.noise) v = dist(noise_eng);
    dist.reset();
    for (auto& v : s.time) v = dist(time_eng);
    return s;
}

// One round of the outcome model. The time-varying interference sum is drawn
// through its exact law: given g, sum_j A^t_ij g_j ~ N(0, sigma_t^2 |g|^2 / N),
// independently over i.
inline std::vector<double> step(std::span<const double> y_prev, std::span<const std::uint8_t> w_t,
                                std::span<const std::uint8_t> u, const InterferenceHandle& handle,
                                const StructuralParams& params, double sigma_t, const RoundShocks& shocks) {
    const std::size_t n = y_prev.size();
    if (w_t.size() != n || u.size() != n || handle.size() != n || shocks.noise.size() != n ||
        shocks.time.size() != n)
        throw SimulationError("step: vector lengths disagree");

    std::vector<double> g(n);
    double g_norm2 = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (!std::isfinite(y_prev[j])) throw SimulationError("step: non-finite lagged outcome");
        const double w = w_t[j];
        g[j] = params.alpha * w + params.beta * y_prev[j] + params.gamma * w * y_prev[j];
        g_norm2 += g[j] * g[j];
    }
    const double time_scale = sigma_t * std::sqrt(g_norm2 / static_cast<double>(n));

    std::vector<double> y = handle.apply(g);
    for (std::size_t i = 0; i < n; ++i) {
        const bool human = u[i] != 0;
        const double base = human ? params.delta_h : params.delta_a;
        const double direct = human ? params.tau_h : params.tau_a;
        y[i] += base + direct * w_t[i] + time_scale * shocks.time[i] + params.noise_sd * shocks.noise[i];
        if (!std::isfinite(y[i])) throw SimulationError("step: non-finite outcome produced");
    }
    return y;
}

inline std::vector<double> draw_initial_outcomes(std::size_t n, const StructuralParams& params,
                                                 const SeedTree& seeds) {
    Engine eng = seeds.engine(Stream::init);
    std::normal_distribution<double> dist(0.0, 1.0);
    std::vector<double> y(n);
    for (auto& v : y) v = params.init_mean + params.init_sd * dist(eng);
    return y;
}

namespace detail {

// Advances `panel` over rounds [t_from, t_to] with treatments drawn per plan.
inline void advance(Panel& panel, int t_from, int t_to, const TypeAssignment& types,
                    const InterferenceHandle& handle, const StructuralParams& params,
                    const TreatmentPlan& plan, const SeedTree& seeds) {
    const std::size_t n = panel.n_units();
    for (int t = t_from; t <= t_to; ++t) {
        const auto col = static_cast<std::size_t>(t);
        Engine eng = seeds.engine(Stream::treatment, scenario_tag(plan.scenario), static_cast<std::uint64_t>(t));
        assign_round(panel.w.col(col), plan.pi(t), eng);
        const RoundShocks shocks = draw_round_shocks(n, t, seeds);
        const auto y = step(panel.y.col(col - 1), panel.w.col(col), types.u, handle, params,
                            params.sigma_time_at(t), shocks);
        panel.y.set_col(col, y);
    }
}

}  // namespace detail

inline Panel run_scenario(const PopulationConfig& cfg, const StructuralParams& params, const TypeAssignment& types,
                          const InterferenceHandle& handle, const TreatmentPlan& plan, const SeedTree& seeds) {
    cfg.validate();
    params.validate(cfg.horizon());
    plan.validate();
    if (types.size() != cfg.n_units || handle.size() != cfg.n_units || plan.horizon() != cfg.horizon())
        throw SimulationError("run_scenario: inconsistent dimensions");

    Panel panel(cfg.n_units, cfg.horizon());
    panel.q = types.q;
    panel.scenario = plan.scenario;
    panel.seed = seeds.seed();
    panel.t_warmup = cfg.t_warmup;
    panel.y.set_col(0, draw_initial_outcomes(cfg.n_units, params, seeds));
    detail::advance(panel, 1, cfg.horizon(), types, handle, params, plan, seeds);
    return panel;
}

struct WorldSet {
    Panel control;
    Panel treatment;
    Panel experiment;
    TypeAssignment types;
    std::vector<double> warmup_state;
};

// Shared warmup, then control (pi = 0), treatment (pi = 1) and experiment
// branches. Interference and per-(i,t) deviates are common to all branches.
inline WorldSet run_parallel_worlds(const PopulationConfig& cfg, const StructuralParams& params,
                                    const TypeAssignment& types, const InterferenceHandle& handle,
                                    const TreatmentPlan& experiment_plan, const SeedTree& seeds) {
    cfg.validate();
    params.validate(cfg.horizon());
    experiment_plan.validate();
    if (experiment_plan.horizon() != cfg.horizon() || experiment_plan.t_warmup != cfg.t_warmup)
        throw ConfigError("experiment plan does not cover the configured rounds");
    if (types.size() != cfg.n_units || handle.size() != cfg.n_units)
        throw SimulationError("run_parallel_worlds: inconsistent dimensions");

    TreatmentPlan exp_plan = experiment_plan;
    exp_plan.scenario = Scenario::experiment;

    Panel warm(cfg.n_units, cfg.horizon());
    warm.q = types.q;
    warm.seed = seeds.seed();
    warm.t_warmup = cfg.t_warmup;
    warm.y.set_col(0, draw_initial_outcomes(cfg.n_units, params, seeds));
    detail::advance(warm, 1, cfg.t_warmup, types, handle, params, TreatmentPlan::control(cfg), seeds);

    WorldSet worlds;
    worlds.types = types;
    auto ws = warm.y.col(static_cast<std::size_t>(cfg.t_warmup));
    worlds.warmup_state.assign(ws.begin(), ws.end());

    auto branch = [&](const TreatmentPlan& plan) {
        Panel p = warm;
        p.scenario = plan.scenario;
        detail::advance(p, cfg.t_warmup + 1, cfg.horizon(), types, handle, params, plan, seeds);
        return p;
    };
    worlds.control = branch(TreatmentPlan::control(cfg));
    worlds.treatment = branch(TreatmentPlan::treatment(cfg));
    worlds.experiment = branch(exp_plan);
    return worlds;
}

// Mean over units with u_i == type of (treatment - control), per round.
inline EffectSeries type_effect(const WorldSet& worlds, std::uint8_t type) {
    const auto& u = worlds.types.u;
    std::size_t count = 0;
    for (auto v : u) count += (v == type);
    if (count == 0)
        throw SimulationError(type ? "ground truth: population has no human units"
                                   : "ground truth: population has no AI units");
    EffectSeries out(worlds.control.horizon());
    for (int t = 1; t <= out.horizon(); ++t) {
        const auto c = worlds.control.y.col(static_cast<std::size_t>(t));
        const auto tr = worlds.treatment.y.col(static_cast<std::size_t>(t));
        double s = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i)
            if (u[i] == type) s += tr[i] - c[i];
        out[t] = s / static_cast<double>(count);
    }
    return out;
}

inline EffectSeries ground_truth_tte(const WorldSet& worlds) { return type_effect(worlds, 1); }

inline EffectSeries population_effect(const WorldSet& worlds) {
    EffectSeries out(worlds.control.horizon());
    for (int t = 1; t <= out.horizon(); ++t) {
        const auto c = worlds.control.y.col(static_cast<std::size_t>(t));
        const auto tr = worlds.treatment.y.col(static_cast<std::size_t>(t));
        double s = 0.0;
        for (std::size_t i = 0; i < c.size(); ++i) s += tr[i] - c[i];
        out[t] = s / static_cast<double>(c.size());
    }
    return out;
}

// Convenience: draw types, build interference and run all three worlds.
inline WorldSet simulate_worlds(const PopulationConfig& cfg, const StructuralParams& params,
                                const PriorQualityConfig& quality, const TreatmentPlan& experiment_plan,
                                InterferenceMode mode = InterferenceMode::streamed) {
    const SeedTree seeds(cfg.seed);
    TypeAssignment types = draw_types(cfg, quality, seeds);
    const InterferenceHandle handle = build_interference(params, types.u, mode, seeds);
    return run_parallel_worlds(cfg, params, types, handle, experiment_plan, seeds);
}

}  // namespace mixsim
