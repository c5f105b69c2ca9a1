#pragma once
// Outcome-free subpopulation construction and aggregate summaries.
// Only the priors q and treatments W are read here; outcomes enter through
// summarize() alone.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "mixsim/core_model.hpp"

namespace mixsim {

struct Subpopulation {
    std::vector<std::size_t> indices;   // ascending unit ids
    int stratum_id = 0;
    int anchor_rank = 0;
};

// Round-indexed paths have T+1 entries; entry 0 is round 0.
struct SubpopSummary {
    double q_k = 0.0;
    std::vector<double> pi_path;
    std::vector<double> y_path;
    std::size_t size = 0;
    int stratum_id = 0;
    int anchor_rank = 0;
};

struct PopulationSummary {
    double q_bar = 0.0;
    std::vector<double> pi_path;
    std::vector<double> y_path;
};

struct BatchOptions {
    int n_strata = 3;
    int n_anchors = 3;
    std::size_t block_size = 0;    // 0: ceil(|pool| / n_anchors)
    std::size_t random_size = 0;   // 0: ceil(block / 5)
    std::size_t min_size = 20;
    double min_traj_dist = 0.02;
    int duration_from = 1;         // first round counted in d_i

    void validate() const {
        detail::require(n_strata >= 1, "n_strata must be at least 1");
        detail::require(n_anchors >= 1, "n_anchors must be at least 1");
        detail::require(min_traj_dist >= 0.0, "min_traj_dist must be non-negative");
        detail::require(duration_from >= 1, "duration_from must be at least 1");
    }
};

// Quantile bins of q with sizes differing by at most one (earlier bins get
// the extra units); ties in q are ordered by unit id.
inline std::vector<std::vector<std::size_t>> stratify_by_prior(std::span<const double> q, int n_strata) {
    detail::require(n_strata >= 1, "n_strata must be at least 1");
    const std::size_t n = q.size();
    detail::require(static_cast<std::size_t>(n_strata) <= n, "n_strata exceeds the number of units");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return q[a] < q[b]; });

    std::vector<std::vector<std::size_t>> pools(static_cast<std::size_t>(n_strata));
    const std::size_t k = static_cast<std::size_t>(n_strata);
    std::size_t pos = 0;
    for (std::size_t s = 0; s < k; ++s) {
        const std::size_t len = n / k + (s < n % k ? 1 : 0);
        pools[s].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                        order.begin() + static_cast<std::ptrdiff_t>(pos + len));
        std::sort(pools[s].begin(), pools[s].end());
        pos += len;
    }
    return pools;
}

inline std::vector<int> treatment_durations(const Grid<std::uint8_t>& w, int t_from = 1) {
    std::vector<int> d(w.rows(), 0);
    for (std::size_t t = static_cast<std::size_t>(t_from); t < w.cols(); ++t) {
        const auto col = w.col(t);
        for (std::size_t i = 0; i < d.size(); ++i) d[i] += col[i];
    }
    return d;
}

// Evenly spaced anchors along the pool sorted by (d_i, id); each batch merges
// a contiguous block around its anchor with a uniform random sample of the
// pool, duplicates removed.
inline std::vector<Subpopulation> build_batches(std::span<const std::size_t> pool, const Grid<std::uint8_t>& w,
                                                int n_anchors, std::size_t block_size, std::size_t random_size,
                                                Engine& eng, int stratum_id = 0, int duration_from = 1) {
    if (pool.empty()) throw ConfigError("build_batches: empty pool");
    detail::require(n_anchors >= 1, "n_anchors must be at least 1");
    detail::require(block_size + random_size >= 1, "block_size + random_size must be at least 1");

    const auto d = treatment_durations(w, duration_from);
    std::vector<std::size_t> sorted(pool.begin(), pool.end());
    std::sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
        return d[a] != d[b] ? d[a] < d[b] : a < b;
    });

    const std::size_t m = sorted.size();
    const std::size_t block = std::min(block_size, m);
    const std::size_t n_random = std::min(random_size, m);
    std::vector<Subpopulation> out;
    out.reserve(static_cast<std::size_t>(n_anchors));
    for (int a = 0; a < n_anchors; ++a) {
        const double frac = n_anchors == 1 ? 0.5 : static_cast<double>(a) / (n_anchors - 1);
        const auto anchor = static_cast<std::size_t>(std::llround(frac * static_cast<double>(m - 1)));
        const std::size_t half = block / 2;
        std::size_t start = anchor >= half ? anchor - half : 0;
        start = std::min(start, m - block);

        std::vector<std::size_t> members(sorted.begin() + static_cast<std::ptrdiff_t>(start),
                                         sorted.begin() + static_cast<std::ptrdiff_t>(start + block));
        std::vector<std::size_t> drawn;
        std::sample(pool.begin(), pool.end(), std::back_inserter(drawn), n_random, eng);
        members.insert(members.end(), drawn.begin(), drawn.end());
        std::sort(members.begin(), members.end());
        members.erase(std::unique(members.begin(), members.end()), members.end());
        out.push_back({std::move(members), stratum_id, a});
    }
    return out;
}

inline std::vector<double> batch_pi_path(const Subpopulation& s, const Grid<std::uint8_t>& w) {
    std::vector<double> pi(w.cols(), 0.0);
    for (std::size_t t = 0; t < w.cols(); ++t) {
        const auto col = w.col(t);
        double acc = 0.0;
        for (auto i : s.indices) acc += col[i];
        pi[t] = acc / static_cast<double>(s.indices.size());
    }
    return pi;
}

// Drops small batches, then keeps only the first of any group of same-stratum
// batches whose treatment trajectories are within min_traj_dist (max-norm).
inline std::vector<Subpopulation> prune_batches(const std::vector<Subpopulation>& batches,
                                                const Grid<std::uint8_t>& w, std::size_t min_size,
                                                double min_traj_dist) {
    std::vector<Subpopulation> kept;
    std::vector<std::vector<double>> kept_paths;
    for (const auto& b : batches) {
        if (b.indices.size() < min_size || b.indices.empty()) continue;
        auto path = batch_pi_path(b, w);
        bool duplicate = false;
        for (std::size_t k = 0; k < kept.size() && !duplicate; ++k) {
            if (kept[k].stratum_id != b.stratum_id) continue;
            double dist = 0.0;
            for (std::size_t t = 0; t < path.size(); ++t) dist = std::max(dist, std::abs(path[t] - kept_paths[k][t]));
            duplicate = dist <= min_traj_dist;
        }
        if (duplicate) continue;
        kept.push_back(b);
        kept_paths.push_back(std::move(path));
    }
    if (kept.empty()) throw EstimationError("prune_batches: every batch was pruned");
    return kept;
}

// Stratify, build per-stratum batches (one substream per stratum) and prune.
inline std::vector<Subpopulation> construct_subpopulations(std::span<const double> q, const Grid<std::uint8_t>& w,
                                                           const BatchOptions& opt, const SeedTree& seeds) {
    opt.validate();
    const auto pools = stratify_by_prior(q, opt.n_strata);
    std::vector<Subpopulation> all;
    for (std::size_t s = 0; s < pools.size(); ++s) {
        const std::size_t m = pools[s].size();
        const auto anchors = static_cast<std::size_t>(opt.n_anchors);
        const std::size_t block = opt.block_size ? opt.block_size : (m + anchors - 1) / anchors;
        const std::size_t random = opt.random_size ? opt.random_size : (block + 4) / 5;
        Engine eng = seeds.engine(Stream::batches, s);
        auto batches = build_batches(pools[s], w, opt.n_anchors, block, random, eng, static_cast<int>(s),
                                     opt.duration_from);
        all.insert(all.end(), std::make_move_iterator(batches.begin()), std::make_move_iterator(batches.end()));
    }
    return prune_batches(all, w, opt.min_size, opt.min_traj_dist);
}

inline SubpopSummary summarize_batch(const Panel& panel, const Subpopulation& s) {
    if (s.indices.empty()) throw ConfigError("summarize: empty batch");
    SubpopSummary out;
    out.size = s.indices.size();
    out.stratum_id = s.stratum_id;
    out.anchor_rank = s.anchor_rank;
    const double inv = 1.0 / static_cast<double>(out.size);
    double qs = 0.0;
    for (auto i : s.indices) {
        if (i >= panel.n_units()) throw ConfigError("summarize: batch index out of range");
        qs += panel.q[i];
    }
    out.q_k = qs * inv;
    const std::size_t cols = panel.y.cols();
    out.pi_path.assign(cols, 0.0);
    out.y_path.assign(cols, 0.0);
    for (std::size_t t = 0; t < cols; ++t) {
        const auto yc = panel.y.col(t);
        const auto wc = panel.w.col(t);
        double ys = 0.0;
        double ws = 0.0;
        for (auto i : s.indices) {
            ys += yc[i];
            ws += wc[i];
        }
        out.y_path[t] = ys * inv;
        out.pi_path[t] = ws * inv;
    }
    return out;
}

inline PopulationSummary summarize_population(const Panel& panel) {
    PopulationSummary pop;
    const std::size_t n = panel.n_units();
    pop.q_bar = mean_of(panel.q);
    pop.pi_path.assign(panel.y.cols(), 0.0);
    pop.y_path.assign(panel.y.cols(), 0.0);
    for (std::size_t t = 0; t < panel.y.cols(); ++t) {
        double ys = 0.0;
        double ws = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            ys += panel.y(i, t);
            ws += panel.w(i, t);
        }
        pop.y_path[t] = ys / static_cast<double>(n);
        pop.pi_path[t] = ws / static_cast<double>(n);
    }
    return pop;
}

struct Summaries {
    std::vector<SubpopSummary> batches;
    PopulationSummary population;
};

inline Summaries summarize(const Panel& panel, const std::vector<Subpopulation>& batches) {
    Summaries out;
    out.batches.reserve(batches.size());
    for (const auto& b : batches) out.batches.push_back(summarize_batch(panel, b));
    out.population = summarize_population(panel);
    return out;
}

}  // namespace mixsim
