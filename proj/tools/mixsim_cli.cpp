// Command line front end: simulate, estimate, diag, benchmark, sweep.
// Settings resolve as defaults < --config file < explicit flags.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "mixsim/harness.hpp"

namespace {

using namespace mixsim;

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kIdentifiability = 3 };

struct CommonFlags {
    std::string config_path;
    std::optional<std::string> engine;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> n_units;
    std::optional<int> t_warmup;
    std::optional<int> t_main;
    std::optional<double> human_fraction;
    std::optional<double> accuracy;
    std::optional<double> noise_sd;
    std::optional<std::vector<double>> phases;
    std::optional<int> n_strata;
    std::optional<int> n_anchors;
    std::optional<std::size_t> block_size;
    std::optional<std::size_t> random_size;
    std::optional<std::size_t> min_size;
    std::optional<int> fit_from;
    std::optional<std::string> human_memory;
    bool strict = false;
    std::optional<std::string> interference;
    std::optional<int> threads;

    void attach(CLI::App* app) {
        app->add_option("-c,--config", config_path, "JSON config file")->check(CLI::ExistingFile);
        app->add_option("--engine", engine, "synthetic or agentsim");
        app->add_option("--seed", seed, "master seed");
        app->add_option("--n-units", n_units, "population size");
        app->add_option("--t-warmup", t_warmup, "warmup rounds");
        app->add_option("--t-main", t_main, "main rounds");
        app->add_option("--human-fraction", human_fraction, "share of human units");
        app->add_option("--accuracy", accuracy, "classifier accuracy a");
        app->add_option("--noise-sd", noise_sd, "classifier noise sd");
        app->add_option("--phases", phases, "treatment rates of the main-round phases")->delimiter(',');
        app->add_option("--n-strata", n_strata, "prior strata");
        app->add_option("--n-anchors", n_anchors, "batches per stratum");
        app->add_option("--block-size", block_size, "contiguous block size (0: auto)");
        app->add_option("--random-size", random_size, "random fill size (0: auto)");
        app->add_option("--min-size", min_size, "minimum batch size");
        app->add_option("--fit-from", fit_from, "first regression round");
        app->add_option("--human-memory", human_memory, "population or own");
        app->add_flag("--strict", strict, "identifiability failures are errors");
        app->add_option("--interference", interference, "dense or streamed");
        app->add_option("--threads", threads, "worker threads (0: all cores)");
    }

    BenchmarkConfig resolve() const {
        BenchmarkConfig c;
        if (!config_path.empty()) apply_json(c, parse_config_file());
        if (engine) c.engine = engine_from_string(*engine);
        if (seed) c.seeds = {*seed};
        if (n_units) c.population.n_units = *n_units;
        if (t_warmup) c.population.t_warmup = *t_warmup;
        if (t_main) c.population.t_main = *t_main;
        if (human_fraction) c.population.human_fraction = *human_fraction;
        if (accuracy) c.prior.accuracy = *accuracy;
        if (noise_sd) c.prior.noise_sd = *noise_sd;
        if (phases) c.phases = *phases;
        if (n_strata) c.subpop.n_strata = *n_strata;
        if (n_anchors) c.subpop.n_anchors = *n_anchors;
        if (block_size) c.subpop.block_size = *block_size;
        if (random_size) c.subpop.random_size = *random_size;
        if (min_size) c.subpop.min_size = *min_size;
        if (fit_from) c.estimator.fit_from = *fit_from;
        if (human_memory) apply_json(c, {{"estimator", {{"human_memory", *human_memory}}}});
        if (strict) c.estimator.strict = true;
        if (interference) apply_json(c, {{"interference", *interference}});
        if (threads) c.threads = *threads;
        return c;
    }

private:
    nlohmann::json parse_config_file() const {
        try {
            return nlohmann::json::parse(io::read_file(config_path));
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError("config is not valid JSON: " + std::string(e.what()));
        }
    }
};

Panel load_panel(const std::string& path, const std::string& scenario) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read " + path);
    return io::read_panel_csv(f, scenario);
}

// Estimation settings for a panel read from disk: warmup length comes from
// the panel itself.
BenchmarkConfig for_panel(BenchmarkConfig c, const Panel& p) {
    c.population.n_units = p.n_units();
    c.population.t_warmup = p.t_warmup;
    c.population.t_main = p.horizon() - p.t_warmup;
    return c;
}

void emit(const std::string& out, const std::string& content) {
    if (out.empty() || out == "-") std::cout << content;
    else io::write_file(out, content);
}

int cmd_simulate(const CommonFlags& flags, const std::string& out) {
    const BenchmarkConfig cfg = flags.resolve();
    cfg.validate();
    const auto seed = cfg.seeds.front();
    const WorldSet w = generate_worlds(cfg, seed, cfg.prior);
    const std::filesystem::path dir(out);
    io::ensure_writable_dir(dir);
    io::write_file(dir / "panel_control.csv", io::panel_csv(w.control));
    io::write_file(dir / "panel_treatment.csv", io::panel_csv(w.treatment));
    io::write_file(dir / "panel_experiment.csv", io::panel_csv(w.experiment));
    io::write_file(dir / "ground_truth.csv", io::effects_csv({{"truth_h", ground_truth_tte(w)},
                                                              {"truth_a", type_effect(w, 0)},
                                                              {"truth_pop", population_effect(w)}}));
    std::cerr << "wrote panels for seed " << seed << " to " << dir.string() << "\n";
    return kOk;
}

int cmd_estimate(const CommonFlags& flags, const std::string& panel_path, const std::string& scenario,
                 const std::string& out, const std::string& fit_out) {
    const Panel panel = load_panel(panel_path, scenario);
    const BenchmarkConfig cfg = for_panel(flags.resolve(), panel);
    cfg.validate();
    const auto batches =
        construct_subpopulations(panel.q, panel.w, batch_options(cfg), SeedTree(cfg.seeds.front()));
    const Estimate est = estimate_tte_h(panel, batches, estimator_options(cfg));
    for (const auto& w : est.warnings) std::cerr << "warning: " << w << "\n";

    RecursionOptions ro;
    ro.window.t_lo = cfg.estimator.fit_from;
    ro.treat_start = cfg.treat_start();
    io::NamedSeries series{{"alg1", est.effect}};
    auto add = [&](const char* name, auto fn) {
        try {
            series.emplace_back(name, fn().effect);
        } catch (const std::exception& e) {
            std::cerr << "warning: " << name << ": " << e.what() << "\n";
        }
    };
    add("cmp", [&] { return cmp_full(panel, batches, ro); });
    add("cmp_basic", [&] { return cmp_basic(panel, ro); });
    add("dim", [&] { return dim(panel); });
    add("dim_filtered", [&] { return dim_filtered(panel, cfg.dim_filter); });
    add("ht_q", [&] { return ht_q(panel); });
    emit(out, io::effects_csv(series));
    if (!fit_out.empty()) {
        nlohmann::json j = io::fit_json(est.fit);
        j["warnings"] = est.warnings;
        j["batches"] = io::batches_json(batches, &panel);
        io::write_file(fit_out, j.dump(2) + "\n");
    }
    return kOk;
}

int cmd_diag(const CommonFlags& flags, const std::string& panel_path, const std::string& scenario,
             const std::string& out) {
    const Panel panel = load_panel(panel_path, scenario);
    const BenchmarkConfig cfg = for_panel(flags.resolve(), panel);
    cfg.validate();
    const auto batches =
        construct_subpopulations(panel.q, panel.w, batch_options(cfg), SeedTree(cfg.seeds.front()));
    const auto s = summarize(panel, batches);
    const auto opt = estimator_options(cfg);
    const auto fit = fit_theta(build_design(s.batches, s.population, opt.window));
    IdentifiabilityOptions id = opt.identifiability;
    id.window = opt.window;
    const auto rep = check_identifiability(s.batches, s.population, id);
    nlohmann::json j = io::identifiability_json(rep);
    j["design_rank"] = fit.design_rank;
    j["rank_deficient"] = fit.rank_deficient;
    j["singular_values"] = fit.singular_values;
    j["n_batches"] = batches.size();
    emit(out, j.dump(2) + "\n");
    if (cfg.estimator.strict && (!rep.pass() || fit.rank_deficient)) {
        std::cerr << "identifiability checks failed\n";
        return kIdentifiability;
    }
    return kOk;
}

BenchmarkConfig benchmark_config(const CommonFlags& flags, std::uint64_t first_seed, int n_seeds, bool no_panels) {
    BenchmarkConfig cfg = flags.resolve();
    if (n_seeds < 1) throw ConfigError("--n-seeds must be at least 1");
    cfg.seeds.clear();
    for (int k = 0; k < n_seeds; ++k) cfg.seeds.push_back(first_seed + static_cast<std::uint64_t>(k));
    if (no_panels) cfg.write_panels = false;
    cfg.validate();
    return cfg;
}

int cmd_benchmark(const CommonFlags& flags, int n_seeds, const std::string& out, bool no_panels) {
    const BenchmarkConfig cfg = benchmark_config(flags, *flags.seed, n_seeds, no_panels);
    const auto res = run_benchmark(cfg);
    report(res, out);
    std::cout << format_table(res);
    for (const auto& s : res.seeds) {
        if (!s.error.empty()) std::cerr << "seed " << s.seed << ": " << s.error << "\n";
        for (const auto& r : s.runs)
            if (!r.ok) std::cerr << "seed " << s.seed << " " << r.name << ": " << r.error << "\n";
    }
    return cfg.estimator.strict && res.any_identifiability_error() ? kIdentifiability : kOk;
}

int cmd_sweep(const CommonFlags& flags, int n_seeds, const std::string& out, bool no_panels) {
    const BenchmarkConfig cfg = benchmark_config(flags, flags.seed.value_or(0), n_seeds, no_panels);
    const auto sw = sweep_priors(cfg);
    report_sweep(sw, out);
    for (const auto& r : sw.runs) {
        std::printf("a = %g, sigma = %g\n", r.quality.accuracy, r.quality.noise_sd);
        std::cout << format_table(r) << "\n";
    }
    bool id_err = false;
    for (const auto& r : sw.runs) id_err = id_err || r.any_identifiability_error();
    return cfg.estimator.strict && id_err ? kIdentifiability : kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Human effect estimation under human/AI mixing with network interference"};
    app.require_subcommand(1);

    CommonFlags sim_flags, est_flags, diag_flags, bench_flags, sweep_flags;
    std::string sim_out, est_panel, est_scenario = "experiment", est_out, est_fit, diag_panel,
                         diag_scenario = "experiment", diag_out, bench_out, sweep_out;
    int bench_n = 10, sweep_n = 10;
    bool bench_no_panels = false, sweep_no_panels = false;

    auto* sim = app.add_subcommand("simulate", "generate control, treatment and experiment panels");
    sim_flags.attach(sim);
    sim->add_option("-o,--out", sim_out, "output directory")->required();

    auto* est = app.add_subcommand("estimate", "effect series from an experiment panel");
    est_flags.attach(est);
    est->add_option("-p,--panel", est_panel, "panel CSV")->required()->check(CLI::ExistingFile);
    est->add_option("--scenario", est_scenario, "scenario to read from the panel file");
    est->add_option("-o,--out", est_out, "effects CSV (default: stdout)");
    est->add_option("--fit", est_fit, "write the fit report as JSON");

    auto* diag = app.add_subcommand("diag", "identifiability report for an experiment panel");
    diag_flags.attach(diag);
    diag->add_option("-p,--panel", diag_panel, "panel CSV")->required()->check(CLI::ExistingFile);
    diag->add_option("--scenario", diag_scenario, "scenario to read from the panel file");
    diag->add_option("-o,--out", diag_out, "report JSON (default: stdout)");

    auto* bench = app.add_subcommand("benchmark", "full pipeline over consecutive seeds");
    bench_flags.attach(bench);
    bench->get_option("--seed")->required();
    bench->get_option("--engine")->required();
    bench->add_option("-o,--out", bench_out, "output directory")->required();
    bench->add_option("-n,--n-seeds", bench_n, "number of seeds starting at --seed");
    bench->add_flag("--no-panels", bench_no_panels, "skip per-seed panel files");

    auto* sweep = app.add_subcommand("sweep", "benchmark over the prior-quality grid");
    sweep_flags.attach(sweep);
    sweep->add_option("-o,--out", sweep_out, "output directory")->required();
    sweep->add_option("-n,--n-seeds", sweep_n, "number of seeds starting at --seed");
    sweep->add_flag("--no-panels", sweep_no_panels, "skip per-seed panel files");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        if (*sim) return cmd_simulate(sim_flags, sim_out);
        if (*est) return cmd_estimate(est_flags, est_panel, est_scenario, est_out, est_fit);
        if (*diag) return cmd_diag(diag_flags, diag_panel, diag_scenario, diag_out);
        if (*bench) return cmd_benchmark(bench_flags, bench_n, bench_out, bench_no_panels);
        if (*sweep) return cmd_sweep(sweep_flags, sweep_n, sweep_out, sweep_no_panels);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const IdentifiabilityError& e) {
        std::cerr << "identifiability failure: " << e.what() << "\n";
        return kIdentifiability;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
    return kFailure;
}
