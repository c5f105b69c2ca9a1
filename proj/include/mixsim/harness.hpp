#pragma once
// Benchmark orchestration: per-seed worlds, ground truth, the ESE estimator and the
// reference estimators, metrics, cross-seed aggregation and file reports.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mixsim/agentsim/platform.hpp"
#include "mixsim/baselines.hpp"
#include "mixsim/config.hpp"
#include "mixsim/io.hpp"

namespace mixsim {

inline constexpr std::array<std::string_view, 6> kEstimatorIds = {"alg1", "cmp", "cmp_basic",
                                                                  "dim", "dim_filtered", "ht_q"};
inline constexpr std::array<std::string_view, 3> kTruthIds = {"truth_h", "truth_a", "truth_pop"};

inline std::string_view display_name(std::string_view id) {
    if (id == "alg1") return "ESE estimator";
    if (id == "cmp") return "CMP";
    if (id == "cmp_basic") return "CMP Basic";
    if (id == "dim") return "DIM";
    if (id == "dim_filtered") return "DIM-filtered";
    if (id == "ht_q") return "HT-q";
    if (id == "truth_h") return "Ground truth (human)";
    if (id == "truth_a") return "Ground truth (AI)";
    if (id == "truth_pop") return "Ground truth (population)";
    return id;
}

struct MetricsRow {
    std::string estimator;
    double mae = kUndefined;
    double final_err = kUndefined;
    double est_tte = kUndefined;
};

// Over rounds t_from..t_to: mean |est - truth|, est - truth at t_to, mean est.
// Undefined rounds make the affected metrics undefined.
inline MetricsRow compute_metrics(std::string name, const EffectSeries& est, const EffectSeries& truth, int t_from,
                                  int t_to) {
    detail::require(t_from >= 1 && t_from <= t_to && t_to <= est.horizon() && t_to <= truth.horizon(),
                    "metric window outside the effect series");
    MetricsRow m;
    m.estimator = std::move(name);
    double abs_sum = 0.0;
    double sum = 0.0;
    for (int t = t_from; t <= t_to; ++t) {
        abs_sum += std::abs(est[t] - truth[t]);
        sum += est[t];
    }
    const double n = t_to - t_from + 1;
    m.mae = abs_sum / n;
    m.est_tte = sum / n;
    m.final_err = est[t_to] - truth[t_to];
    return m;
}

inline double mean_over(const EffectSeries& s, int t_from, int t_to) {
    double sum = 0.0;
    for (int t = t_from; t <= t_to; ++t) sum += s[t];
    return sum / (t_to - t_from + 1);
}

struct EstimatorRun {
    std::string name;
    bool ok = false;
    std::string error;
    bool identifiability_error = false;
    EffectSeries effect;
    MetricsRow metrics;
    std::vector<std::string> param_names;
    std::vector<double> params;
};

struct SeedResult {
    std::uint64_t seed = 0;
    PriorQualityConfig quality{};
    std::string error;   // non-empty when the worlds could not be generated
    WorldSet worlds;
    EffectSeries truth_h, truth_a, truth_pop;
    std::vector<Subpopulation> batches;
    std::string batch_error;
    std::optional<Estimate> alg1;
    std::vector<EstimatorRun> runs;   // kEstimatorIds order

    bool ok() const noexcept { return error.empty(); }
    const EstimatorRun* run(std::string_view id) const {
        for (const auto& r : runs)
            if (r.name == id) return &r;
        return nullptr;
    }
    const EffectSeries& truth(std::string_view id) const {
        return id == "truth_h" ? truth_h : (id == "truth_a" ? truth_a : truth_pop);
    }
};

inline WorldSet generate_worlds(const BenchmarkConfig& cfg, std::uint64_t seed, const PriorQualityConfig& quality) {
    PopulationConfig pop = cfg.population;
    pop.seed = seed;
    const auto plan = TreatmentPlan::experiment(pop, cfg.phases);
    if (cfg.engine == EngineKind::synthetic) return simulate_worlds(pop, cfg.structural, quality, plan, cfg.interference);
    return agentsim::run_platform(pop, quality, plan, cfg.kernel);
}

inline BatchOptions batch_options(const BenchmarkConfig& cfg) {
    BatchOptions b = cfg.subpop;
    if (cfg.estimator.treat_from_warmup_end) b.duration_from = cfg.population.t_warmup + 1;
    return b;
}

inline EstimatorOptions estimator_options(const BenchmarkConfig& cfg) {
    EstimatorOptions o;
    o.window.t_lo = cfg.estimator.fit_from;
    o.strict = cfg.estimator.strict;
    o.counterfactual.treat_start = cfg.treat_start();
    o.counterfactual.human_memory = cfg.estimator.human_memory;
    o.identifiability = cfg.estimator.identifiability;
    return o;
}

inline SeedResult run_seed(const BenchmarkConfig& cfg, std::uint64_t seed, const PriorQualityConfig& quality) {
    SeedResult r;
    r.seed = seed;
    r.quality = quality;
    try {
        r.worlds = generate_worlds(cfg, seed, quality);
        r.truth_h = ground_truth_tte(r.worlds);
        r.truth_a = type_effect(r.worlds, 0);
        r.truth_pop = population_effect(r.worlds);
    } catch (const std::exception& e) {
        r.error = e.what();
        return r;
    }
    const Panel& panel = r.worlds.experiment;
    try {
        r.batches = construct_subpopulations(panel.q, panel.w, batch_options(cfg), SeedTree(seed));
    } catch (const std::exception& e) {
        r.batch_error = e.what();
    }

    const int t_from = cfg.population.t_warmup + 1;
    const int t_to = cfg.population.horizon();
    RecursionOptions ro;
    ro.window.t_lo = cfg.estimator.fit_from;
    ro.treat_start = cfg.treat_start();

    for (std::string_view id : kEstimatorIds) {
        EstimatorRun run;
        run.name = std::string(id);
        try {
            const bool needs_batches = id == "alg1" || id == "cmp";
            if (needs_batches && !r.batch_error.empty()) throw EstimationError("no batches: " + r.batch_error);
            BaselineResult b;
            if (id == "alg1") {
                r.alg1 = estimate_tte_h(panel, r.batches, estimator_options(cfg));
                b.effect = r.alg1->effect;
                for (const char* n : {"delta_h", "delta_a", "tau_h", "tau_a", "alpha_bar", "beta_bar", "gamma_bar"})
                    b.param_names.emplace_back(n);
                const auto th = r.alg1->fit.theta_hat.as_array();
                b.params.assign(th.begin(), th.end());
            } else if (id == "cmp") {
                b = cmp_full(panel, r.batches, ro);
            } else if (id == "cmp_basic") {
                b = cmp_basic(panel, ro);
            } else if (id == "dim") {
                b = dim(panel);
            } else if (id == "dim_filtered") {
                b = dim_filtered(panel, cfg.dim_filter);
            } else {
                b = ht_q(panel);
            }
            run.effect = std::move(b.effect);
            run.param_names = std::move(b.param_names);
            run.params = std::move(b.params);
            run.metrics = compute_metrics(run.name, run.effect, r.truth_h, t_from, t_to);
            run.ok = true;
        } catch (const IdentifiabilityError& e) {
            run.error = e.what();
            run.identifiability_error = true;
        } catch (const std::exception& e) {
            run.error = e.what();
        }
        if (!run.ok) run.metrics.estimator = run.name;
        r.runs.push_back(std::move(run));
    }
    return r;
}

// Mean and standard error (sample sd / sqrt(n)) of the finite values.
struct MeanSe {
    double mean = kUndefined;
    double se = kUndefined;
    std::size_t n = 0;
};

inline MeanSe mean_se(const std::vector<double>& xs) {
    MeanSe out;
    double sum = 0.0;
    for (double x : xs)
        if (std::isfinite(x)) {
            sum += x;
            ++out.n;
        }
    if (out.n == 0) return out;
    out.mean = sum / static_cast<double>(out.n);
    if (out.n < 2) return out;
    double ss = 0.0;
    for (double x : xs)
        if (std::isfinite(x)) ss += (x - out.mean) * (x - out.mean);
    out.se = std::sqrt(ss / static_cast<double>(out.n - 1)) / std::sqrt(static_cast<double>(out.n));
    return out;
}

struct AggregateRow {
    std::string estimator;
    MeanSe mae, final_err, est_tte;
};

struct TrajectoryPoint {
    std::string series;
    int t = 0;
    MeanSe value;
};

struct BenchmarkResult {
    BenchmarkConfig config;
    PriorQualityConfig quality{};
    std::vector<SeedResult> seeds;   // ascending seed order
    std::vector<AggregateRow> metrics;
    std::vector<AggregateRow> truth;   // est_tte holds the mean effect
    std::vector<TrajectoryPoint> trajectories;

    bool any_identifiability_error() const {
        for (const auto& s : seeds)
            for (const auto& r : s.runs)
                if (r.identifiability_error) return true;
        return false;
    }
};

inline void aggregate(BenchmarkResult& res) {
    const int t_from = res.config.population.t_warmup + 1;
    const int t_to = res.config.population.horizon();
    res.metrics.clear();
    res.truth.clear();
    res.trajectories.clear();
    for (std::string_view id : kEstimatorIds) {
        std::vector<double> mae, fe, tte;
        for (const auto& s : res.seeds) {
            const auto* r = s.run(id);
            if (!r || !r->ok) continue;
            mae.push_back(r->metrics.mae);
            fe.push_back(r->metrics.final_err);
            tte.push_back(r->metrics.est_tte);
        }
        res.metrics.push_back({std::string(id), mean_se(mae), mean_se(fe), mean_se(tte)});
    }
    for (std::string_view id : kTruthIds) {
        std::vector<double> tte, fin;
        for (const auto& s : res.seeds) {
            if (!s.ok()) continue;
            tte.push_back(mean_over(s.truth(id), t_from, t_to));
            fin.push_back(s.truth(id)[t_to]);
        }
        AggregateRow row;
        row.estimator = std::string(id);
        row.est_tte = mean_se(tte);
        row.final_err = mean_se(fin);
        res.truth.push_back(row);
    }
    auto add_series = [&](std::string_view id, auto get) {
        for (int t = 0; t <= t_to; ++t) {
            std::vector<double> xs;
            for (const auto& s : res.seeds)
                if (const EffectSeries* e = get(s)) xs.push_back((*e)[t]);
            res.trajectories.push_back({std::string(id), t, mean_se(xs)});
        }
    };
    for (std::string_view id : kTruthIds)
        add_series(id, [&](const SeedResult& s) { return s.ok() ? &s.truth(id) : nullptr; });
    for (std::string_view id : kEstimatorIds)
        add_series(id, [&](const SeedResult& s) -> const EffectSeries* {
            const auto* r = s.run(id);
            return r && r->ok ? &r->effect : nullptr;
        });
}

// Seeds run on a worker pool; each seed is self-contained so results do not
// depend on the number of threads.
inline BenchmarkResult run_benchmark(const BenchmarkConfig& cfg, std::optional<PriorQualityConfig> quality = {}) {
    cfg.validate();
    BenchmarkResult res;
    res.config = cfg;
    res.quality = quality.value_or(cfg.prior);
    res.quality.validate();
    std::vector<std::uint64_t> seeds = cfg.seeds;
    std::sort(seeds.begin(), seeds.end());
    seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
    res.seeds.resize(seeds.size());

    std::size_t n_threads = cfg.threads > 0 ? static_cast<std::size_t>(cfg.threads)
                                            : std::max(1u, std::thread::hardware_concurrency());
    n_threads = std::min(n_threads, seeds.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < seeds.size(); k = next++) res.seeds[k] = run_seed(cfg, seeds[k], res.quality);
    };
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t k = 0; k < n_threads; ++k) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    aggregate(res);
    return res;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

namespace harness_detail {

using io::fmt;

inline std::string metrics_csv(const BenchmarkResult& res) {
    std::ostringstream os;
    os << "estimator,n,mae_mean,mae_se,final_err_mean,final_err_se,est_tte_mean,est_tte_se\n";
    for (const auto& r : res.metrics)
        os << r.estimator << ',' << r.mae.n << ',' << fmt(r.mae.mean) << ',' << fmt(r.mae.se) << ','
           << fmt(r.final_err.mean) << ',' << fmt(r.final_err.se) << ',' << fmt(r.est_tte.mean) << ','
           << fmt(r.est_tte.se) << '\n';
    return os.str();
}

inline std::string truth_csv(const BenchmarkResult& res) {
    std::ostringstream os;
    os << "series,n,effect_mean,effect_se,final_mean,final_se\n";
    for (const auto& r : res.truth)
        os << r.estimator << ',' << r.est_tte.n << ',' << fmt(r.est_tte.mean) << ',' << fmt(r.est_tte.se) << ','
           << fmt(r.final_err.mean) << ',' << fmt(r.final_err.se) << '\n';
    return os.str();
}

inline std::string metrics_by_seed_csv(const BenchmarkResult& res) {
    std::ostringstream os;
    os << "seed,estimator,status,mae,final_err,est_tte\n";
    for (const auto& s : res.seeds)
        for (std::string_view id : kEstimatorIds) {
            const auto* r = s.run(id);
            const bool ok = r && r->ok;
            os << s.seed << ',' << id << ',' << (ok ? "ok" : "failed") << ',' << fmt(ok ? r->metrics.mae : kUndefined)
               << ',' << fmt(ok ? r->metrics.final_err : kUndefined) << ','
               << fmt(ok ? r->metrics.est_tte : kUndefined) << '\n';
        }
    return os.str();
}

inline std::string effects_by_seed_csv(const BenchmarkResult& res) {
    std::ostringstream os;
    os << "seed,series,t,value\n";
    for (const auto& s : res.seeds) {
        if (!s.ok()) continue;
        for (std::string_view id : kTruthIds)
            for (int t = 0; t <= s.truth(id).horizon(); ++t) os << s.seed << ',' << id << ',' << t << ',' << fmt(s.truth(id)[t]) << '\n';
        for (const auto& r : s.runs) {
            if (!r.ok) continue;
            for (int t = 0; t <= r.effect.horizon(); ++t) os << s.seed << ',' << r.name << ',' << t << ',' << fmt(r.effect[t]) << '\n';
        }
    }
    return os.str();
}

inline std::string trajectories_csv(const BenchmarkResult& res) {
    std::ostringstream os;
    os << "series,t,mean,se,n\n";
    for (const auto& p : res.trajectories)
        os << p.series << ',' << p.t << ',' << fmt(p.value.mean) << ',' << fmt(p.value.se) << ',' << p.value.n << '\n';
    return os.str();
}

inline std::string coord(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline constexpr std::array<std::pair<std::string_view, std::string_view>, 7> kColors = {{
    {"truth_h", "#000000"},
    {"alg1", "#d62728"},
    {"cmp", "#1f77b4"},
    {"cmp_basic", "#9467bd"},
    {"dim", "#2ca02c"},
    {"dim_filtered", "#ff7f0e"},
    {"ht_q", "#8c564b"},
}};

// Mean line per series with a +-1 SE band. The y range follows the ground
// truth; series leaving it are clipped at the plot border.
inline std::string chart_svg(const BenchmarkResult& res) {
    const int t_to = res.config.population.horizon();
    const double W = 720, H = 420, ml = 60, mr = 170, mt = 30, mb = 45;
    const double pw = W - ml - mr, ph = H - mt - mb;

    double scale = 0.0;
    for (const auto& p : res.trajectories)
        if (p.series == "truth_h" && std::isfinite(p.value.mean)) scale = std::max(scale, std::abs(p.value.mean));
    const double cap = 2.0 * scale + 0.5;
    double lo = -0.25, hi = 0.25;
    for (const auto& p : res.trajectories) {
        bool drawn = false;
        for (const auto& [id, _] : kColors) drawn = drawn || id == p.series;
        if (!drawn || !std::isfinite(p.value.mean)) continue;
        lo = std::min(lo, std::max(p.value.mean, -cap));
        hi = std::max(hi, std::min(p.value.mean, cap));
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
    auto x = [&](int t) { return ml + pw * t / std::max(1, t_to); };
    auto y = [&](double v) { return mt + ph * (hi - v) / (hi - lo); };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
       << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<defs><clipPath id=\"plot\"><rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\""
       << ph << "\"/></clipPath></defs>\n";
    os << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"#ffffff\"/>\n";
    os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"#444444\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double v = lo + (hi - lo) * k / 4.0;
        os << "<line x1=\"" << ml << "\" x2=\"" << ml + pw << "\" y1=\"" << coord(y(v)) << "\" y2=\"" << coord(y(v))
           << "\" stroke=\"#dddddd\"/>\n";
        os << "<text x=\"" << ml - 6 << "\" y=\"" << coord(y(v) + 4) << "\" text-anchor=\"end\">" << coord(v)
           << "</text>\n";
    }
    for (int t = 0; t <= t_to; t += std::max(1, t_to / 8))
        os << "<text x=\"" << coord(x(t)) << "\" y=\"" << H - mb + 16 << "\" text-anchor=\"middle\">" << t
           << "</text>\n";
    if (lo < 0 && hi > 0)
        os << "<line x1=\"" << ml << "\" x2=\"" << ml + pw << "\" y1=\"" << coord(y(0)) << "\" y2=\"" << coord(y(0))
           << "\" stroke=\"#888888\" stroke-dasharray=\"4 3\"/>\n";
    const double tw = x(res.config.population.t_warmup);
    os << "<line x1=\"" << coord(tw) << "\" x2=\"" << coord(tw) << "\" y1=\"" << mt << "\" y2=\"" << mt + ph
       << "\" stroke=\"#888888\" stroke-dasharray=\"2 3\"/>\n";
    os << "<text x=\"" << ml + pw / 2 << "\" y=\"" << H - 8 << "\" text-anchor=\"middle\">round</text>\n";
    os << "<text x=\"16\" y=\"" << mt + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
       << mt + ph / 2 << ")\">human effect</text>\n";

    os << "<g clip-path=\"url(#plot)\">\n";
    for (const auto& [id, color] : kColors) {
        std::vector<const TrajectoryPoint*> pts;
        for (const auto& p : res.trajectories)
            if (p.series == id && std::isfinite(p.value.mean)) pts.push_back(&p);
        if (pts.empty()) continue;
        std::string upper, lower;
        bool band = true;
        for (const auto* p : pts) band = band && std::isfinite(p->value.se);
        if (band) {
            os << "<polygon fill=\"" << color << "\" fill-opacity=\"0.15\" stroke=\"none\" points=\"";
            for (const auto* p : pts) os << coord(x(p->t)) << ',' << coord(y(p->value.mean + p->value.se)) << ' ';
            for (auto it = pts.rbegin(); it != pts.rend(); ++it)
                os << coord(x((*it)->t)) << ',' << coord(y((*it)->value.mean - (*it)->value.se)) << ' ';
            os << "\"/>\n";
        }
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << (id == "truth_h" ? 2.5 : 1.5)
           << "\" points=\"";
        for (const auto* p : pts) os << coord(x(p->t)) << ',' << coord(y(p->value.mean)) << ' ';
        os << "\"/>\n";
    }
    os << "</g>\n";
    double ly = mt + 10;
    for (const auto& [id, color] : kColors) {
        os << "<line x1=\"" << ml + pw + 12 << "\" x2=\"" << ml + pw + 32 << "\" y1=\"" << ly << "\" y2=\"" << ly
           << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << ml + pw + 38 << "\" y=\"" << ly + 4 << "\">"
           << (id == "truth_h" ? std::string_view("Ground truth") : display_name(id)) << "</text>\n";
        ly += 20;
    }
    os << "</svg>\n";
    return os.str();
}

inline nlohmann::json manifest_config(const BenchmarkConfig& cfg) {
    auto j = to_json(cfg);
    j.erase("threads");
    j.erase("output_dir");
    j.erase("seeds");
    return j;
}

}  // namespace harness_detail

inline std::string seed_dir_name(const BenchmarkConfig& cfg, std::uint64_t seed) {
    return std::string(to_string(cfg.engine)) + "_seed" + std::to_string(seed);
}

// Writes one directory per seed plus the aggregate files. Returns the list of
// files written relative to `dir`.
inline std::vector<std::string> report(const BenchmarkResult& res, const std::filesystem::path& dir) {
    using namespace harness_detail;
    io::ensure_writable_dir(dir);
    std::vector<std::string> written;
    auto put = [&](const std::filesystem::path& rel, const std::string& content) {
        io::write_file(dir / rel, content);
        written.push_back(rel.generic_string());
        return io::blob_sha1(content);
    };

    for (const auto& s : res.seeds) {
        const std::filesystem::path sd = seed_dir_name(res.config, s.seed);
        nlohmann::json files = nlohmann::json::object();
        nlohmann::json errors = nlohmann::json::object();
        if (s.ok()) {
            if (res.config.write_panels) {
                files["panel_control.csv"] = put(sd / "panel_control.csv", io::panel_csv(s.worlds.control));
                files["panel_treatment.csv"] = put(sd / "panel_treatment.csv", io::panel_csv(s.worlds.treatment));
                files["panel_experiment.csv"] = put(sd / "panel_experiment.csv", io::panel_csv(s.worlds.experiment));
            }
            files["batches.json"] = put(sd / "batches.json", io::batches_json(s.batches, &s.worlds.experiment).dump(2) + "\n");
            nlohmann::json fit = nlohmann::json::object();
            fit["alg1"] = s.alg1 ? io::fit_json(s.alg1->fit) : nlohmann::json(nullptr);
            fit["alg1_warnings"] = s.alg1 ? s.alg1->warnings : std::vector<std::string>{};
            for (const auto& r : s.runs) {
                if (!r.ok || r.name == "alg1" || r.params.empty()) continue;
                nlohmann::json p = nlohmann::json::object();
                for (std::size_t k = 0; k < r.params.size(); ++k) p[r.param_names[k]] = io::num(r.params[k]);
                fit[r.name] = p;
            }
            files["fit.json"] = put(sd / "fit.json", fit.dump(2) + "\n");
            io::NamedSeries series;
            for (std::string_view id : kTruthIds) series.emplace_back(std::string(id), s.truth(id));
            for (const auto& r : s.runs)
                if (r.ok) series.emplace_back(r.name, r.effect);
            files["effects.csv"] = put(sd / "effects.csv", io::effects_csv(series));
        }
        if (!s.error.empty()) errors["worlds"] = s.error;
        if (!s.batch_error.empty()) errors["batches"] = s.batch_error;
        for (const auto& r : s.runs)
            if (!r.ok) errors[r.name] = r.error;
        nlohmann::json manifest = {{"engine", to_string(res.config.engine)},
                                   {"seed", s.seed},
                                   {"prior", {{"accuracy", s.quality.accuracy}, {"noise_sd", s.quality.noise_sd}}},
                                   {"config", manifest_config(res.config)},
                                   {"files", files},
                                   {"errors", errors}};
        put(sd / "manifest.json", manifest.dump(2) + "\n");
    }
    put("metrics.csv", metrics_csv(res));
    put("ground_truth.csv", truth_csv(res));
    put("metrics_by_seed.csv", metrics_by_seed_csv(res));
    put("effects_by_seed.csv", effects_by_seed_csv(res));
    put("trajectories.csv", trajectories_csv(res));
    put("trajectories.svg", chart_svg(res));
    return written;
}

// Method / MAE / final error / estimated TTE table, rounded for display only.
inline std::string format_table(const BenchmarkResult& res) {
    std::ostringstream os;
    char line[160];
    std::snprintf(line, sizeof line, "%-28s %18s %18s %18s\n", "Method", "MAE", "Final err", "Est. TTE");
    os << line;
    auto cell = [](const MeanSe& m) {
        char b[48];
        if (!std::isfinite(m.mean)) return std::string("NA");
        if (std::isfinite(m.se)) std::snprintf(b, sizeof b, "%.3f +- %.3f", m.mean, m.se);
        else std::snprintf(b, sizeof b, "%.3f", m.mean);
        return std::string(b);
    };
    for (const auto& r : res.truth) {
        std::snprintf(line, sizeof line, "%-28s %18s %18s %18s\n", std::string(display_name(r.estimator)).c_str(), "",
                      "", cell(r.est_tte).c_str());
        os << line;
    }
    for (const auto& r : res.metrics) {
        std::snprintf(line, sizeof line, "%-28s %18s %18s %18s\n", std::string(display_name(r.estimator)).c_str(),
                      cell(r.mae).c_str(), cell(r.final_err).c_str(), cell(r.est_tte).c_str());
        os << line;
    }
    return os.str();
}

struct SweepResult {
    std::vector<BenchmarkResult> runs;   // prior_sweep order
};

inline SweepResult sweep_priors(const BenchmarkConfig& cfg) {
    detail::require(!cfg.prior_sweep.empty(), "prior_sweep is empty");
    SweepResult out;
    for (const auto& q : cfg.prior_sweep) out.runs.push_back(run_benchmark(cfg, q));
    return out;
}

inline std::string sweep_dir_name(const PriorQualityConfig& q) {
    char b[64];
    std::snprintf(b, sizeof b, "a%g_sigma%g", q.accuracy, q.noise_sd);
    return b;
}

inline std::string sweep_csv(const SweepResult& sw) {
    using io::fmt;
    std::ostringstream os;
    os << "accuracy,noise_sd,estimator,n,mae_mean,mae_se,final_err_mean,final_err_se,est_tte_mean,est_tte_se\n";
    for (const auto& r : sw.runs) {
        for (const auto& t : r.truth)
            os << fmt(r.quality.accuracy) << ',' << fmt(r.quality.noise_sd) << ',' << t.estimator << ','
               << t.est_tte.n << ",NA,NA," << fmt(t.final_err.mean) << ',' << fmt(t.final_err.se) << ','
               << fmt(t.est_tte.mean) << ',' << fmt(t.est_tte.se) << '\n';
        for (const auto& m : r.metrics)
            os << fmt(r.quality.accuracy) << ',' << fmt(r.quality.noise_sd) << ',' << m.estimator << ',' << m.mae.n
               << ',' << fmt(m.mae.mean) << ',' << fmt(m.mae.se) << ',' << fmt(m.final_err.mean) << ','
               << fmt(m.final_err.se) << ',' << fmt(m.est_tte.mean) << ',' << fmt(m.est_tte.se) << '\n';
    }
    return os.str();
}

inline std::vector<std::string> report_sweep(const SweepResult& sw, const std::filesystem::path& dir) {
    io::ensure_writable_dir(dir);
    std::vector<std::string> written;
    for (const auto& r : sw.runs) {
        const auto sub = sweep_dir_name(r.quality);
        for (const auto& f : report(r, dir / sub)) written.push_back(sub + "/" + f);
    }
    io::write_file(dir / "sweep.csv", sweep_csv(sw));
    written.push_back("sweep.csv");
    return written;
}

}  // namespace mixsim
