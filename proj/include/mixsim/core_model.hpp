#pragma once
// Shared domain types: population and structural configuration, latent
// types with their observed priors, treatment plans and the panel record.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mixsim/errors.hpp"
#include "mixsim/grid.hpp"
#include "mixsim/rng.hpp"

namespace mixsim {

inline constexpr double kUndefined = std::numeric_limits<double>::quiet_NaN();

// ----------------------------------------------------------------------------
// Prior over the human probability q_i.
// ----------------------------------------------------------------------------
struct PriorDistribution {
    enum class Kind { point_mass, uniform, two_point };

    Kind kind = Kind::uniform;
    double value = 0.5;   // point mass location
    double lo = 0.0;      // uniform support
    double hi = 1.0;
    double a = 0.0;       // two-point mixture: a with probability weight_a, else b
    double b = 1.0;
    double weight_a = 0.5;

    static PriorDistribution point(double v) {
        PriorDistribution d;
        d.kind = Kind::point_mass;
        d.value = v;
        return d;
    }
    static PriorDistribution uniform(double lo, double hi) {
        PriorDistribution d;
        d.kind = Kind::uniform;
        d.lo = lo;
        d.hi = hi;
        return d;
    }
    static PriorDistribution two_point(double a, double b, double weight_a) {
        PriorDistribution d;
        d.kind = Kind::two_point;
        d.a = a;
        d.b = b;
        d.weight_a = weight_a;
        return d;
    }

    void validate() const {
        auto in01 = [](double x) { return std::isfinite(x) && x >= 0.0 && x <= 1.0; };
        switch (kind) {
        case Kind::point_mass:
            detail::require(in01(value), "prior point mass must lie in [0,1]");
            break;
        case Kind::uniform:
            detail::require(in01(lo) && in01(hi) && lo <= hi,
                            "uniform prior support must satisfy 0 <= lo <= hi <= 1");
            break;
        case Kind::two_point:
            detail::require(in01(a) && in01(b), "two-point prior atoms must lie in [0,1]");
            detail::require(in01(weight_a), "two-point prior weight must lie in [0,1]");
            break;
        }
    }

    double mean() const noexcept {
        switch (kind) {
        case Kind::point_mass: return value;
        case Kind::uniform: return 0.5 * (lo + hi);
        case Kind::two_point: return weight_a * a + (1.0 - weight_a) * b;
        }
        return 0.0;
    }

    double sample(Engine& eng) const {
        switch (kind) {
        case Kind::point_mass: return value;
        case Kind::uniform: return lo + (hi - lo) * uniform01(eng);
        case Kind::two_point: return uniform01(eng) < weight_a ? a : b;
        }
        return 0.0;
    }
};

enum class PriorMode { model_faithful, classifier };

inline std::string_view to_string(PriorMode m) {
    return m == PriorMode::model_faithful ? "model_faithful" : "classifier";
}

struct PopulationConfig {
    std::size_t n_units = 200;
    int t_warmup = 4;
    int t_main = 12;
    std::uint64_t seed = 0;
    double human_fraction = 0.5;   // classifier mode: exact human share
    PriorMode prior_mode = PriorMode::classifier;
    PriorDistribution type_prior = PriorDistribution::uniform(0.0, 1.0);  // model mode p_u

    int horizon() const noexcept { return t_warmup + t_main; }

    void validate() const {
        detail::require(n_units >= 2, "n_units must be at least 2");
        detail::require(t_warmup >= 0, "t_warmup must be non-negative");
        detail::require(t_main >= 3, "t_main must be at least 3");
        detail::require(human_fraction >= 0.0 && human_fraction <= 1.0,
                        "human_fraction must lie in [0,1]");
        type_prior.validate();
    }
};

// Coefficients of the outcome model. mu_h / mu_a are the average interference
// strengths received by human / AI units; the time-varying interference part
// is mean zero with scale sigma_time (or sigma_time_path[t-1] when given).
struct StructuralParams {
    double delta_h = 0.5;
    double delta_a = -0.2;
    double tau_h = 1.0;
    double tau_a = -0.8;
    double alpha = 0.3;
    double beta = 0.5;
    double gamma = 0.1;
    double mu_h = 1.0;
    double mu_a = 1.0;
    double sigma_fixed = 0.0;
    double sigma_time = 0.5;
    std::vector<double> sigma_time_path;
    double noise_sd = 1.0;
    double init_mean = 0.0;
    double init_sd = 1.0;
    double stability_cap = 2.0;   // bound on |beta + gamma|

    double sigma_time_at(int t) const {
        if (sigma_time_path.empty()) return sigma_time;
        return sigma_time_path.at(static_cast<std::size_t>(t - 1));
    }

    void validate(int horizon = -1) const {
        for (double v : {delta_h, delta_a, tau_h, tau_a, alpha, beta, gamma, mu_h, mu_a, init_mean})
            detail::require(std::isfinite(v), "structural parameters must be finite");
        detail::require(sigma_fixed >= 0.0 && sigma_time >= 0.0 && noise_sd >= 0.0 && init_sd >= 0.0,
                        "variance-like parameters must be non-negative");
        for (double s : sigma_time_path)
            detail::require(std::isfinite(s) && s >= 0.0, "sigma_time_path entries must be >= 0");
        if (horizon >= 0 && !sigma_time_path.empty())
            detail::require(sigma_time_path.size() == static_cast<std::size_t>(horizon),
                            "sigma_time_path must have one entry per round");
        detail::require(std::abs(beta + gamma) <= stability_cap,
                        "|beta + gamma| exceeds the stability cap");
    }
};

struct TypeAssignment {
    std::vector<std::uint8_t> u;   // 1 = human; latent
    std::vector<double> q;         // observed priors

    std::size_t size() const noexcept { return q.size(); }
    std::size_t n_humans() const noexcept {
        return static_cast<std::size_t>(std::count(u.begin(), u.end(), std::uint8_t{1}));
    }
};

struct PriorQualityConfig {
    double accuracy = 0.8;
    double noise_sd = 0.15;

    void validate() const {
        detail::require(accuracy >= 0.5 && accuracy <= 1.0, "classifier accuracy must lie in [0.5,1]");
        detail::require(noise_sd >= 0.0, "classifier noise_sd must be non-negative");
    }
};

enum class Scenario { control, treatment, experiment, custom };

inline std::string_view to_string(Scenario s) {
    switch (s) {
    case Scenario::control: return "control";
    case Scenario::treatment: return "treatment";
    case Scenario::experiment: return "experiment";
    case Scenario::custom: return "custom";
    }
    return "custom";
}

inline Scenario scenario_from_string(std::string_view s) {
    if (s == "control") return Scenario::control;
    if (s == "treatment") return Scenario::treatment;
    if (s == "experiment") return Scenario::experiment;
    if (s == "custom") return Scenario::custom;
    throw ConfigError("unknown scenario '" + std::string(s) + "'");
}

// Per-round Bernoulli probabilities; pi_schedule[t-1] is the rate in round t.
struct TreatmentPlan {
    std::vector<double> pi_schedule;
    Scenario scenario = Scenario::custom;
    int t_warmup = 0;

    int horizon() const noexcept { return static_cast<int>(pi_schedule.size()); }
    double pi(int t) const { return pi_schedule.at(static_cast<std::size_t>(t - 1)); }

    static TreatmentPlan constant(const PopulationConfig& cfg, double p, Scenario s) {
        TreatmentPlan plan;
        plan.scenario = s;
        plan.t_warmup = cfg.t_warmup;
        plan.pi_schedule.assign(static_cast<std::size_t>(cfg.horizon()), 0.0);
        for (int t = cfg.t_warmup + 1; t <= cfg.horizon(); ++t) plan.pi_schedule[static_cast<std::size_t>(t - 1)] = p;
        return plan;
    }
    static TreatmentPlan control(const PopulationConfig& cfg) { return constant(cfg, 0.0, Scenario::control); }
    static TreatmentPlan treatment(const PopulationConfig& cfg) { return constant(cfg, 1.0, Scenario::treatment); }

    // Main rounds split into consecutive phases of (near) equal length; earlier
    // phases absorb the remainder when t_main is not divisible.
    static TreatmentPlan experiment(const PopulationConfig& cfg,
                                    const std::vector<double>& phases = {0.2, 0.5, 0.8}) {
        detail::require(!phases.empty(), "experiment plan needs at least one phase");
        TreatmentPlan plan = constant(cfg, 0.0, Scenario::experiment);
        const std::size_t n_phase = phases.size();
        const std::size_t main = static_cast<std::size_t>(cfg.t_main);
        std::size_t t = static_cast<std::size_t>(cfg.t_warmup);
        for (std::size_t k = 0; k < n_phase; ++k) {
            std::size_t len = main / n_phase + (k < main % n_phase ? 1 : 0);
            for (std::size_t r = 0; r < len; ++r) plan.pi_schedule[t++] = phases[k];
        }
        plan.validate();
        return plan;
    }

    static TreatmentPlan custom(const PopulationConfig& cfg, std::vector<double> schedule) {
        TreatmentPlan plan;
        plan.scenario = Scenario::custom;
        plan.t_warmup = cfg.t_warmup;
        plan.pi_schedule = std::move(schedule);
        detail::require(plan.horizon() == cfg.horizon(), "pi_schedule length must equal the horizon");
        plan.validate();
        return plan;
    }

    void validate() const {
        for (double p : pi_schedule)
            detail::require(std::isfinite(p) && p >= 0.0 && p <= 1.0, "treatment probabilities must lie in [0,1]");
        for (int t = 1; t <= std::min(t_warmup, horizon()); ++t)
            detail::require(pi(t) == 0.0, "warmup rounds must have zero treatment probability");
    }
};

// Observable experiment record. Column t of y holds round t (0..T); w has the
// same shape with column 0 identically zero.
struct Panel {
    Grid<double> y;
    Grid<std::uint8_t> w;
    std::vector<double> q;
    Scenario scenario = Scenario::custom;
    std::uint64_t seed = 0;
    int t_warmup = 0;

    Panel() = default;
    Panel(std::size_t n, int horizon)
        : y(n, static_cast<std::size_t>(horizon) + 1),
          w(n, static_cast<std::size_t>(horizon) + 1, 0),
          q(n, 0.0) {}

    std::size_t n_units() const noexcept { return y.rows(); }
    int horizon() const noexcept { return static_cast<int>(y.cols()) - 1; }

    void validate() const {
        detail::require(y.rows() == w.rows() && y.cols() == w.cols() && q.size() == y.rows(),
                        "panel dimensions are inconsistent");
        detail::require(y.cols() >= 2, "panel needs at least one post-baseline round");
        for (std::size_t i = 0; i < n_units(); ++i) {
            detail::require(w(i, 0) == 0, "round 0 carries no treatment");
            detail::require(q[i] >= 0.0 && q[i] <= 1.0, "priors must lie in [0,1]");
        }
        for (auto v : w.data()) detail::require(v <= 1, "treatments must be binary");
    }
};

// Per-round effect values, index = round, values[0] = 0. Rounds where an
// estimator is undefined hold kUndefined.
struct EffectSeries {
    std::vector<double> values;

    EffectSeries() = default;
    explicit EffectSeries(int horizon) : values(static_cast<std::size_t>(horizon) + 1, 0.0) {}

    int horizon() const noexcept { return static_cast<int>(values.size()) - 1; }
    double operator[](int t) const { return values.at(static_cast<std::size_t>(t)); }
    double& operator[](int t) { return values.at(static_cast<std::size_t>(t)); }
    bool defined(int t) const { return !std::isnan((*this)[t]); }
};

// ----------------------------------------------------------------------------
// Type and prior generation
// ----------------------------------------------------------------------------

// q_i ~ p_u, then u_i ~ Bernoulli(q_i).
inline TypeAssignment draw_types_model(std::size_t n, const PriorDistribution& p_u, Engine& eng) {
    p_u.validate();
    TypeAssignment out;
    out.q.resize(n);
    out.u.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.q[i] = p_u.sample(eng);
        out.u[i] = uniform01(eng) < out.q[i] ? 1 : 0;
    }
    return out;
}

// Exactly round(n * fraction) humans at uniformly random positions.
inline std::vector<std::uint8_t> draw_types_split(std::size_t n, double human_fraction, Engine& eng) {
    const auto n_h = static_cast<std::size_t>(std::llround(static_cast<double>(n) * human_fraction));
    std::vector<std::uint8_t> u(n, 0);
    std::fill_n(u.begin(), std::min(n_h, n), std::uint8_t{1});
    std::shuffle(u.begin(), u.end(), eng);
    return u;
}

inline double classifier_prior(std::uint8_t u, double accuracy, double eps) {
    const double centre = u ? accuracy : 1.0 - accuracy;
    return std::clamp(centre + eps, 0.0, 1.0);
}

inline std::vector<double> gen_priors_classifier(std::span<const std::uint8_t> u,
                                                 const PriorQualityConfig& cfg, Engine& eng) {
    cfg.validate();
    std::vector<double> q(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        detail::require(u[i] <= 1, "type vector must be binary");
        const double eps = cfg.noise_sd > 0.0 ? cfg.noise_sd * standard_normal(eng) : 0.0;
        q[i] = classifier_prior(u[i], cfg.accuracy, eps);
    }
    return q;
}

inline TypeAssignment draw_types(const PopulationConfig& cfg, const PriorQualityConfig& quality,
                                 const SeedTree& seeds) {
    if (cfg.prior_mode == PriorMode::model_faithful) {
        Engine eng = seeds.engine(Stream::types);
        return draw_types_model(cfg.n_units, cfg.type_prior, eng);
    }
    Engine type_eng = seeds.engine(Stream::types);
    Engine prior_eng = seeds.engine(Stream::priors);
    TypeAssignment out;
    out.u = draw_types_split(cfg.n_units, cfg.human_fraction, type_eng);
    out.q = gen_priors_classifier(out.u, quality, prior_eng);
    return out;
}

// ----------------------------------------------------------------------------
// Treatment assignment
// ----------------------------------------------------------------------------

inline void assign_round(std::span<std::uint8_t> column, double pi, Engine& eng) {
    if (pi <= 0.0) {
        std::fill(column.begin(), column.end(), std::uint8_t{0});
        return;
    }
    if (pi >= 1.0) {
        std::fill(column.begin(), column.end(), std::uint8_t{1});
        return;
    }
    std::bernoulli_distribution coin(pi);
    for (auto& w : column) w = coin(eng) ? 1 : 0;
}

inline std::uint64_t scenario_tag(Scenario s) { return static_cast<std::uint64_t>(s) + 1; }

// W_{i,t} ~ Bernoulli(pi_t), one substream per (scenario, round).
inline Grid<std::uint8_t> assign_treatments(const TreatmentPlan& plan, std::size_t n, const SeedTree& seeds) {
    plan.validate();
    Grid<std::uint8_t> w(n, static_cast<std::size_t>(plan.horizon()) + 1, 0);
    for (int t = 1; t <= plan.horizon(); ++t) {
        Engine eng = seeds.engine(Stream::treatment, scenario_tag(plan.scenario), static_cast<std::uint64_t>(t));
        assign_round(w.col(static_cast<std::size_t>(t)), plan.pi(t), eng);
    }
    return w;
}

// ----------------------------------------------------------------------------
// Small numeric helpers
// ----------------------------------------------------------------------------

template <class Range>
double mean_of(const Range& r) {
    double s = 0.0;
    std::size_t n = 0;
    for (auto v : r) {
        s += static_cast<double>(v);
        ++n;
    }
    return n ? s / static_cast<double>(n) : kUndefined;
}

}  // namespace mixsim
