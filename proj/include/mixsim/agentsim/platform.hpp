#pragma once
// Rule-based discussion platform: a pool of seed threads, popularity-weighted
// feeds, an optional sponsored success-story slot and kernel-driven actions.
// Each round every user sees 4 threads; the outcome is the number of threads
// the user replied to or liked.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <span>
#include <string>
#include <vector>

#include "mixsim/agentsim/kernel.hpp"
#include "mixsim/agentsim/persona.hpp"
#include "mixsim/dynamics.hpp"

namespace mixsim::agentsim {

inline constexpr int kFeedSize = 4;
inline constexpr int kSponsoredId = -1;
inline constexpr std::size_t kRecentReplies = 5;

// log(2)/10: keeps zero-reply threads reachable.
inline const double kWeightFloor = std::log(2.0) / 10.0;

struct Reply {
    std::size_t author = 0;
    int round = 0;

    bool operator==(const Reply&) const = default;
};

struct Thread {
    int id = 0;
    std::size_t author = 0;
    Valence valence = Valence::positive;
    int reply_count = 0;
    std::deque<Reply> recent;   // most recent first, at most kRecentReplies

    double weight(double floor = kWeightFloor) const {
        return std::log(static_cast<double>(reply_count) + 1.0) + floor;
    }
    bool operator==(const Thread&) const = default;
};

struct UserState {
    int mood = 2;
    Persona persona;

    bool operator==(const UserState&) const = default;
};

struct PlatformState {
    std::vector<UserState> users;
    std::vector<Thread> threads;   // organic pool; thread id == index == author
    int round = 0;

    std::size_t n_users() const noexcept { return users.size(); }
    bool operator==(const PlatformState&) const = default;
};

struct FeedSlot {
    int thread_id = 0;
    Valence valence = Valence::positive;

    bool sponsored() const noexcept { return thread_id == kSponsoredId; }
    bool operator==(const FeedSlot&) const = default;
};

using Feed = std::array<FeedSlot, kFeedSize>;

inline std::array<Valence, kFeedSize> valences(const Feed& f) {
    std::array<Valence, kFeedSize> v{};
    for (std::size_t k = 0; k < f.size(); ++k) v[k] = f[k].valence;
    return v;
}

// One profile and one seed thread per user: positive for humans, negative
// for AI authors.
inline PlatformState init_platform(std::span<const std::uint8_t> u, const BehaviorKernel& kernel, Engine& eng) {
    PlatformState s;
    s.users.reserve(u.size());
    s.threads.reserve(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        const bool human = u[i] != 0;
        s.users.push_back({kernel.of(human).initial_mood, sample_persona(i, human, eng)});
        s.threads.push_back({static_cast<int>(i), i, human ? Valence::positive : Valence::negative, 0, {}});
    }
    return s;
}

inline PlatformState init_platform(std::size_t n_units, double human_fraction, Engine& eng,
                                   const BehaviorKernel& kernel = BehaviorKernel::defaults()) {
    mixsim::detail::require(human_fraction >= 0.0 && human_fraction <= 1.0, "human_fraction must lie in [0,1]");
    const auto u = draw_types_split(n_units, human_fraction, eng);
    return init_platform(u, kernel, eng);
}

// Weighted sampling without replacement of 4 threads, the user's own thread
// excluded.
inline Feed sample_feed(const PlatformState& state, std::size_t user, Engine& eng, double floor = kWeightFloor) {
    const std::size_t n = state.threads.size();
    std::vector<std::size_t> pool;
    std::vector<double> w;
    pool.reserve(n);
    w.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
        if (state.threads[j].author == user) continue;
        pool.push_back(j);
        w.push_back(state.threads[j].weight(floor));
    }
    if (pool.size() < static_cast<std::size_t>(kFeedSize))
        throw SimulationError("sample_feed: fewer than 4 threads available");

    Feed feed{};
    for (int k = 0; k < kFeedSize; ++k) {
        double total = 0.0;
        for (double x : w) total += x;
        const double target = uniform01(eng) * total;
        double acc = 0.0;
        std::size_t pick = pool.size() - 1;
        for (std::size_t m = 0; m < pool.size(); ++m) {
            acc += w[m];
            if (target < acc && w[m] > 0.0) {
                pick = m;
                break;
            }
        }
        while (w[pick] <= 0.0) --pick;
        const Thread& th = state.threads[pool[pick]];
        feed[static_cast<std::size_t>(k)] = {th.id, th.valence};
        w[pick] = 0.0;
    }
    return feed;
}

// Treated feeds get the sponsored thread in a uniformly random slot. The slot
// draw happens either way so treated and untreated users stay on the same
// random stream.
inline Feed apply_treatment(Feed feed, bool treated, Engine& eng) {
    const auto slot = std::uniform_int_distribution<std::size_t>(0, kFeedSize - 1)(eng);
    if (treated) feed[slot] = {kSponsoredId, Valence::sponsored};
    return feed;
}

struct ActResult {
    std::array<Action, kFeedSize> actions{};
    int engagement = 0;
    int new_mood = 0;
};

// Draw one action per slot, then update mood from what was seen.
inline ActResult user_act(const UserState& user, bool human, const Feed& feed, const BehaviorKernel& kernel,
                          Engine& eng) {
    const TypeKernel& k = kernel.of(human);
    ActResult r;
    double n_pos = 0.0, n_neg = 0.0, n_sp = 0.0;
    for (std::size_t s = 0; s < feed.size(); ++s) {
        const ActionProbs& p = k.cell(feed[s].valence, user.mood);
        const double x = uniform01(eng);
        r.actions[s] = x < p.reply ? Action::reply : (x < p.reply + p.like ? Action::like : Action::skip);
        if (r.actions[s] != Action::skip) ++r.engagement;
        switch (feed[s].valence) {
        case Valence::positive: n_pos += 1.0; break;
        case Valence::negative: n_neg += 1.0; break;
        case Valence::sponsored: n_sp += 1.0; break;
        }
    }
    const MoodWeights& mw = k.mood;
    const double delta = mw.positive * n_pos + mw.negative * n_neg + mw.sponsored * n_sp +
                         mw.reversion * (mw.baseline - user.mood);
    const double fl = std::floor(delta);
    const int step = static_cast<int>(fl) + (uniform01(eng) < delta - fl ? 1 : 0);
    r.new_mood = std::clamp(user.mood + step, kMoodMin, kMoodMax);
    return r;
}

// Applies the replies of one round in unit-index order; sponsored slots are
// never written back to the pool.
inline void commit_replies(PlatformState& state, const std::vector<Feed>& feeds,
                           const std::vector<ActResult>& acts) {
    for (std::size_t i = 0; i < feeds.size(); ++i) {
        for (std::size_t s = 0; s < feeds[i].size(); ++s) {
            if (acts[i].actions[s] != Action::reply || feeds[i][s].sponsored()) continue;
            Thread& th = state.threads[static_cast<std::size_t>(feeds[i][s].thread_id)];
            ++th.reply_count;
            th.recent.push_front({i, state.round});
            if (th.recent.size() > kRecentReplies) th.recent.pop_back();
        }
    }
}

// One round against the start-of-round snapshot. Per-(round, user) engines
// are shared by every world, so branches differ only through their state and
// treatments.
inline std::vector<int> play_round(PlatformState& state, std::span<const std::uint8_t> u,
                                   std::span<const std::uint8_t> w, int t, const BehaviorKernel& kernel,
                                   const SeedTree& seeds) {
    const std::size_t n = state.n_users();
    std::vector<Feed> feeds(n);
    std::vector<ActResult> acts(n);
    for (std::size_t i = 0; i < n; ++i) {
        Engine eng = seeds.engine(Stream::user_round, static_cast<std::uint64_t>(t), i);
        feeds[i] = apply_treatment(sample_feed(state, i, eng), w[i] != 0, eng);
        acts[i] = user_act(state.users[i], u[i] != 0, feeds[i], kernel, eng);
    }
    state.round = t;
    commit_replies(state, feeds, acts);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        state.users[i].mood = acts[i].new_mood;
        y[i] = acts[i].engagement;
    }
    return y;
}

struct PlatformConfig {
    PopulationConfig population;
    PriorQualityConfig prior_quality;
    BehaviorKernel kernel = BehaviorKernel::defaults();
};

namespace detail {

inline void set_round(Panel& panel, int t, const std::vector<int>& y) {
    auto col = panel.y.col(static_cast<std::size_t>(t));
    for (std::size_t i = 0; i < y.size(); ++i) col[i] = static_cast<double>(y[i]);
}

}  // namespace detail

// Round 0 is an untreated engagement round giving Y_0; rounds 1..t_warmup are
// shared, then control, all-treated and experiment branches continue from a
// copy of the warmup state.
inline WorldSet run_platform(const PopulationConfig& cfg, const PriorQualityConfig& quality,
                             const TreatmentPlan& experiment_plan, const BehaviorKernel& kernel) {
    cfg.validate();
    kernel.validate();
    experiment_plan.validate();
    if (experiment_plan.horizon() != cfg.horizon() || experiment_plan.t_warmup != cfg.t_warmup)
        throw ConfigError("experiment plan does not cover the configured rounds");

    const SeedTree seeds(cfg.seed);
    TypeAssignment types = draw_types(cfg, quality, seeds);
    Engine platform_eng = seeds.engine(Stream::platform);
    PlatformState state = init_platform(types.u, kernel, platform_eng);

    Panel warm(cfg.n_units, cfg.horizon());
    warm.q = types.q;
    warm.seed = cfg.seed;
    warm.t_warmup = cfg.t_warmup;
    const std::vector<std::uint8_t> none(cfg.n_units, 0);
    for (int t = 0; t <= cfg.t_warmup; ++t) detail::set_round(warm, t, play_round(state, types.u, none, t, kernel, seeds));

    WorldSet worlds;
    worlds.types = types;
    auto ws = warm.y.col(static_cast<std::size_t>(cfg.t_warmup));
    worlds.warmup_state.assign(ws.begin(), ws.end());

    TreatmentPlan exp_plan = experiment_plan;
    exp_plan.scenario = Scenario::experiment;
    auto branch = [&](const TreatmentPlan& plan) {
        Panel p = warm;
        p.scenario = plan.scenario;
        PlatformState st = state;
        for (int t = cfg.t_warmup + 1; t <= cfg.horizon(); ++t) {
            const auto col = static_cast<std::size_t>(t);
            Engine eng = seeds.engine(Stream::treatment, scenario_tag(plan.scenario), static_cast<std::uint64_t>(t));
            assign_round(p.w.col(col), plan.pi(t), eng);
            detail::set_round(p, t, play_round(st, types.u, p.w.col(col), t, kernel, seeds));
        }
        return p;
    };
    worlds.control = branch(TreatmentPlan::control(cfg));
    worlds.treatment = branch(TreatmentPlan::treatment(cfg));
    worlds.experiment = branch(exp_plan);
    return worlds;
}

inline WorldSet run_platform(const PlatformConfig& cfg, const TreatmentPlan& experiment_plan) {
    return run_platform(cfg.population, cfg.prior_quality, experiment_plan, cfg.kernel);
}

}  // namespace mixsim::agentsim
