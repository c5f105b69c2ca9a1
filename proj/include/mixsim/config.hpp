#pragma once
// Benchmark configuration and its JSON mapping. Every key is optional and
// falls back to the built-in default; unknown keys are rejected.

#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "mixsim/agentsim/kernel.hpp"
#include "mixsim/baselines.hpp"
#include "mixsim/dynamics.hpp"

namespace mixsim {

enum class EngineKind { synthetic, agentsim };

inline std::string_view to_string(EngineKind e) { return e == EngineKind::synthetic ? "synthetic" : "agentsim"; }

inline EngineKind engine_from_string(std::string_view s) {
    if (s == "synthetic") return EngineKind::synthetic;
    if (s == "agentsim") return EngineKind::agentsim;
    throw ConfigError("unknown engine '" + std::string(s) + "' (expected synthetic or agentsim)");
}

struct EstimatorFlags {
    int fit_from = 1;                    // first regression response round
    bool strict = false;                 // identifiability failures become errors
    HumanMemory human_memory = HumanMemory::population;
    bool treat_from_warmup_end = true;   // counterfactual arms and d_i start after warmup
    IdentifiabilityOptions identifiability{};
};

struct BenchmarkConfig {
    EngineKind engine = EngineKind::agentsim;
    std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    PopulationConfig population{};
    StructuralParams structural{};
    PriorQualityConfig prior{};
    std::vector<PriorQualityConfig> prior_sweep{{0.7, 0.15}, {0.8, 0.15}, {0.9, 0.15}};
    std::vector<double> phases{0.2, 0.5, 0.8};
    BatchOptions subpop{};
    DimFilterOptions dim_filter{};
    EstimatorFlags estimator{};
    agentsim::BehaviorKernel kernel = agentsim::BehaviorKernel::defaults();
    InterferenceMode interference = InterferenceMode::streamed;
    int threads = 0;   // 0: hardware concurrency
    bool write_panels = true;
    std::string output_dir = "results";

    int treat_start() const { return estimator.treat_from_warmup_end ? population.t_warmup + 1 : 1; }

    void validate() const {
        detail::require(!seeds.empty(), "at least one seed is required");
        population.validate();
        if (engine == EngineKind::synthetic) structural.validate(population.horizon());
        prior.validate();
        for (const auto& p : prior_sweep) p.validate();
        detail::require(!phases.empty(), "at least one treatment phase is required");
        for (double p : phases) detail::require(p >= 0.0 && p <= 1.0, "phase rates must lie in [0,1]");
        subpop.validate();
        detail::require(estimator.fit_from >= 1 && estimator.fit_from <= population.horizon(),
                        "estimator.fit_from must lie in 1..T");
        detail::require(threads >= 0, "threads must be non-negative");
        kernel.validate();
    }
};

namespace config_detail {

using nlohmann::json;

inline void check_keys(const json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (auto a : allowed) ok = ok || a == key;
        if (!ok) throw ConfigError("unknown key '" + key + "' in " + where);
    }
}

template <class T>
void read(const json& j, std::string_view key, T& out, const std::string& where) {
    const auto it = j.find(key);
    if (it == j.end()) return;
    try {
        if constexpr (std::is_same_v<T, double>) {
            if (!it->is_number()) throw ConfigError("");
        } else if constexpr (std::is_same_v<T, bool>) {
            if (!it->is_boolean()) throw ConfigError("");
        } else if constexpr (std::is_integral_v<T>) {
            if (!it->is_number_integer()) throw ConfigError("");
            if constexpr (std::is_unsigned_v<T>)
                if (it->get<long long>() < 0) throw ConfigError("");
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!it->is_string()) throw ConfigError("");
        }
        out = it->get<T>();
    } catch (const std::exception&) {
        throw ConfigError("key '" + std::string(key) + "' in " + where + " has the wrong type");
    }
}

inline const json* child(const json& j, std::string_view key) {
    const auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

inline void read_prior(const json& j, PriorDistribution& d, const std::string& where) {
    check_keys(j, {"kind", "value", "lo", "hi", "a", "b", "weight_a"}, where);
    std::string kind;
    read(j, "kind", kind, where);
    if (kind == "point_mass") d.kind = PriorDistribution::Kind::point_mass;
    else if (kind == "uniform") d.kind = PriorDistribution::Kind::uniform;
    else if (kind == "two_point") d.kind = PriorDistribution::Kind::two_point;
    else if (!kind.empty()) throw ConfigError("unknown prior kind '" + kind + "'");
    read(j, "value", d.value, where);
    read(j, "lo", d.lo, where);
    read(j, "hi", d.hi, where);
    read(j, "a", d.a, where);
    read(j, "b", d.b, where);
    read(j, "weight_a", d.weight_a, where);
}

inline void read_population(const json& j, PopulationConfig& p) {
    const std::string w = "population";
    check_keys(j, {"n_units", "t_warmup", "t_main", "human_fraction", "prior_mode", "type_prior"}, w);
    read(j, "n_units", p.n_units, w);
    read(j, "t_warmup", p.t_warmup, w);
    read(j, "t_main", p.t_main, w);
    read(j, "human_fraction", p.human_fraction, w);
    std::string mode;
    read(j, "prior_mode", mode, w);
    if (mode == "classifier") p.prior_mode = PriorMode::classifier;
    else if (mode == "model_faithful") p.prior_mode = PriorMode::model_faithful;
    else if (!mode.empty()) throw ConfigError("unknown prior_mode '" + mode + "'");
    if (const json* tp = child(j, "type_prior")) read_prior(*tp, p.type_prior, "population.type_prior");
}

inline void read_structural(const json& j, StructuralParams& s) {
    const std::string w = "structural";
    check_keys(j, {"delta_h", "delta_a", "tau_h", "tau_a", "alpha", "beta", "gamma", "mu_h", "mu_a", "sigma_fixed",
                   "sigma_time", "sigma_time_path", "noise_sd", "init_mean", "init_sd", "stability_cap"},
               w);
    read(j, "delta_h", s.delta_h, w);
    read(j, "delta_a", s.delta_a, w);
    read(j, "tau_h", s.tau_h, w);
    read(j, "tau_a", s.tau_a, w);
    read(j, "alpha", s.alpha, w);
    read(j, "beta", s.beta, w);
    read(j, "gamma", s.gamma, w);
    read(j, "mu_h", s.mu_h, w);
    read(j, "mu_a", s.mu_a, w);
    read(j, "sigma_fixed", s.sigma_fixed, w);
    read(j, "sigma_time", s.sigma_time, w);
    read(j, "sigma_time_path", s.sigma_time_path, w);
    read(j, "noise_sd", s.noise_sd, w);
    read(j, "init_mean", s.init_mean, w);
    read(j, "init_sd", s.init_sd, w);
    read(j, "stability_cap", s.stability_cap, w);
}

inline void read_quality(const json& j, PriorQualityConfig& q, const std::string& where) {
    check_keys(j, {"accuracy", "noise_sd"}, where);
    read(j, "accuracy", q.accuracy, where);
    read(j, "noise_sd", q.noise_sd, where);
}

inline void read_subpop(const json& j, BatchOptions& b) {
    const std::string w = "subpop";
    check_keys(j, {"n_strata", "n_anchors", "block_size", "random_size", "min_size", "min_traj_dist", "duration_from"},
               w);
    read(j, "n_strata", b.n_strata, w);
    read(j, "n_anchors", b.n_anchors, w);
    read(j, "block_size", b.block_size, w);
    read(j, "random_size", b.random_size, w);
    read(j, "min_size", b.min_size, w);
    read(j, "min_traj_dist", b.min_traj_dist, w);
    read(j, "duration_from", b.duration_from, w);
}

inline void read_estimator(const json& j, EstimatorFlags& e) {
    const std::string w = "estimator";
    check_keys(j, {"fit_from", "strict", "human_memory", "treat_from_warmup_end", "q_gap", "p_gap", "p_match_tol"}, w);
    read(j, "fit_from", e.fit_from, w);
    read(j, "strict", e.strict, w);
    std::string mem;
    read(j, "human_memory", mem, w);
    if (mem == "population") e.human_memory = HumanMemory::population;
    else if (mem == "own") e.human_memory = HumanMemory::own;
    else if (!mem.empty()) throw ConfigError("unknown human_memory '" + mem + "' (expected population or own)");
    read(j, "treat_from_warmup_end", e.treat_from_warmup_end, w);
    read(j, "q_gap", e.identifiability.q_gap, w);
    read(j, "p_gap", e.identifiability.p_gap, w);
    read(j, "p_match_tol", e.identifiability.p_match_tol, w);
}

inline constexpr std::array<std::string_view, 3> kValenceKeys = {"positive", "negative", "sponsored"};

// cells: {"positive": [[reply, like] x 3 mood buckets], ...}; skip = 1 - reply - like.
inline void read_type_kernel(const json& j, agentsim::TypeKernel& k, const std::string& where) {
    check_keys(j, {"cells", "mood", "initial_mood"}, where);
    if (const json* cells = child(j, "cells")) {
        check_keys(*cells, {"positive", "negative", "sponsored"}, where + ".cells");
        for (std::size_t v = 0; v < kValenceKeys.size(); ++v) {
            const json* row = child(*cells, kValenceKeys[v]);
            if (!row) continue;
            const std::string rw = where + ".cells." + std::string(kValenceKeys[v]);
            if (!row->is_array() || row->size() != agentsim::kMoodBuckets)
                throw ConfigError(rw + " must list one [reply, like] pair per mood bucket");
            for (std::size_t b = 0; b < row->size(); ++b) {
                const json& c = (*row)[b];
                if (!c.is_array() || c.size() != 2 || !c[0].is_number() || !c[1].is_number())
                    throw ConfigError(rw + " entries must be [reply, like] number pairs");
                k.cells[v][b] = agentsim::detail::probs(c[0].get<double>(), c[1].get<double>());
            }
        }
    }
    if (const json* m = child(j, "mood")) {
        const std::string mw = where + ".mood";
        check_keys(*m, {"positive", "negative", "sponsored", "reversion", "baseline"}, mw);
        read(*m, "positive", k.mood.positive, mw);
        read(*m, "negative", k.mood.negative, mw);
        read(*m, "sponsored", k.mood.sponsored, mw);
        read(*m, "reversion", k.mood.reversion, mw);
        read(*m, "baseline", k.mood.baseline, mw);
    }
    read(j, "initial_mood", k.initial_mood, where);
}

inline json type_kernel_json(const agentsim::TypeKernel& k) {
    json cells = json::object();
    for (std::size_t v = 0; v < kValenceKeys.size(); ++v) {
        json row = json::array();
        for (const auto& c : k.cells[v]) row.push_back({c.reply, c.like});
        cells[std::string(kValenceKeys[v])] = row;
    }
    return {{"cells", cells},
            {"mood",
             {{"positive", k.mood.positive},
              {"negative", k.mood.negative},
              {"sponsored", k.mood.sponsored},
              {"reversion", k.mood.reversion},
              {"baseline", k.mood.baseline}}},
            {"initial_mood", k.initial_mood}};
}

inline json prior_json(const PriorDistribution& d) {
    switch (d.kind) {
    case PriorDistribution::Kind::point_mass: return {{"kind", "point_mass"}, {"value", d.value}};
    case PriorDistribution::Kind::uniform: return {{"kind", "uniform"}, {"lo", d.lo}, {"hi", d.hi}};
    case PriorDistribution::Kind::two_point:
        return {{"kind", "two_point"}, {"a", d.a}, {"b", d.b}, {"weight_a", d.weight_a}};
    }
    return {};
}

}  // namespace config_detail

inline void apply_json(BenchmarkConfig& c, const nlohmann::json& j) {
    using namespace config_detail;
    check_keys(j, {"engine", "seeds", "population", "structural", "prior", "prior_sweep", "phases", "subpop",
                   "dim_filter", "estimator", "kernel", "interference", "threads", "write_panels", "output_dir"},
               "config");
    std::string engine;
    read(j, "engine", engine, "config");
    if (!engine.empty()) c.engine = engine_from_string(engine);
    read(j, "seeds", c.seeds, "config");
    if (const json* p = child(j, "population")) read_population(*p, c.population);
    if (const json* s = child(j, "structural")) read_structural(*s, c.structural);
    if (const json* q = child(j, "prior")) read_quality(*q, c.prior, "prior");
    if (const json* sw = child(j, "prior_sweep")) {
        if (!sw->is_array()) throw ConfigError("prior_sweep must be an array");
        c.prior_sweep.clear();
        for (std::size_t k = 0; k < sw->size(); ++k) {
            PriorQualityConfig q;
            read_quality((*sw)[k], q, "prior_sweep[" + std::to_string(k) + "]");
            c.prior_sweep.push_back(q);
        }
    }
    read(j, "phases", c.phases, "config");
    if (const json* s = child(j, "subpop")) read_subpop(*s, c.subpop);
    if (const json* d = child(j, "dim_filter")) {
        check_keys(*d, {"threshold", "use_median"}, "dim_filter");
        read(*d, "threshold", c.dim_filter.threshold, "dim_filter");
        read(*d, "use_median", c.dim_filter.use_median, "dim_filter");
    }
    if (const json* e = child(j, "estimator")) read_estimator(*e, c.estimator);
    if (const json* k = child(j, "kernel")) {
        check_keys(*k, {"human", "ai"}, "kernel");
        if (const json* h = child(*k, "human")) read_type_kernel(*h, c.kernel.human, "kernel.human");
        if (const json* a = child(*k, "ai")) read_type_kernel(*a, c.kernel.ai, "kernel.ai");
    }
    std::string mode;
    read(j, "interference", mode, "config");
    if (mode == "dense") c.interference = InterferenceMode::dense;
    else if (mode == "streamed") c.interference = InterferenceMode::streamed;
    else if (!mode.empty()) throw ConfigError("unknown interference mode '" + mode + "'");
    read(j, "threads", c.threads, "config");
    read(j, "write_panels", c.write_panels, "config");
    read(j, "output_dir", c.output_dir, "config");
}

inline BenchmarkConfig config_from_json(const nlohmann::json& j) {
    BenchmarkConfig c;
    apply_json(c, j);
    return c;
}

inline BenchmarkConfig parse_config(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return config_from_json(j);
}

inline nlohmann::json to_json(const BenchmarkConfig& c) {
    using namespace config_detail;
    const auto& p = c.population;
    const auto& s = c.structural;
    const auto& e = c.estimator;
    const auto& b = c.subpop;
    json sweep = json::array();
    for (const auto& q : c.prior_sweep) sweep.push_back({{"accuracy", q.accuracy}, {"noise_sd", q.noise_sd}});
    return {
        {"engine", to_string(c.engine)},
        {"seeds", c.seeds},
        {"population",
         {{"n_units", p.n_units},
          {"t_warmup", p.t_warmup},
          {"t_main", p.t_main},
          {"human_fraction", p.human_fraction},
          {"prior_mode", to_string(p.prior_mode)},
          {"type_prior", prior_json(p.type_prior)}}},
        {"structural",
         {{"delta_h", s.delta_h},
          {"delta_a", s.delta_a},
          {"tau_h", s.tau_h},
          {"tau_a", s.tau_a},
          {"alpha", s.alpha},
          {"beta", s.beta},
          {"gamma", s.gamma},
          {"mu_h", s.mu_h},
          {"mu_a", s.mu_a},
          {"sigma_fixed", s.sigma_fixed},
          {"sigma_time", s.sigma_time},
          {"sigma_time_path", s.sigma_time_path},
          {"noise_sd", s.noise_sd},
          {"init_mean", s.init_mean},
          {"init_sd", s.init_sd},
          {"stability_cap", s.stability_cap}}},
        {"prior", {{"accuracy", c.prior.accuracy}, {"noise_sd", c.prior.noise_sd}}},
        {"prior_sweep", sweep},
        {"phases", c.phases},
        {"subpop",
         {{"n_strata", b.n_strata},
          {"n_anchors", b.n_anchors},
          {"block_size", b.block_size},
          {"random_size", b.random_size},
          {"min_size", b.min_size},
          {"min_traj_dist", b.min_traj_dist},
          {"duration_from", b.duration_from}}},
        {"dim_filter", {{"threshold", c.dim_filter.threshold}, {"use_median", c.dim_filter.use_median}}},
        {"estimator",
         {{"fit_from", e.fit_from},
          {"strict", e.strict},
          {"human_memory", e.human_memory == HumanMemory::own ? "own" : "population"},
          {"treat_from_warmup_end", e.treat_from_warmup_end},
          {"q_gap", e.identifiability.q_gap},
          {"p_gap", e.identifiability.p_gap},
          {"p_match_tol", e.identifiability.p_match_tol}}},
        {"kernel", {{"human", type_kernel_json(c.kernel.human)}, {"ai", type_kernel_json(c.kernel.ai)}}},
        {"interference", c.interference == InterferenceMode::dense ? "dense" : "streamed"},
        {"threads", c.threads},
        {"write_panels", c.write_panels},
        {"output_dir", c.output_dir},
    };
}

}  // namespace mixsim
