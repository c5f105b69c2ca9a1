#pragma once
// Behavior kernel: action probabilities per (type, valence, mood bucket) and
// exposure-driven mood updates. Stands in for the language-model personas.

#include <array>
#include <cmath>
#include <string>

#include "mixsim/errors.hpp"

namespace mixsim::agentsim {

enum class Valence { positive = 0, negative = 1, sponsored = 2 };
enum class Action { skip = 0, like = 1, reply = 2 };

inline std::string to_string(Valence v) {
    switch (v) {
    case Valence::positive: return "positive";
    case Valence::negative: return "negative";
    case Valence::sponsored: return "sponsored";
    }
    return "positive";
}

inline std::string to_string(Action a) {
    switch (a) {
    case Action::skip: return "skip";
    case Action::like: return "like";
    case Action::reply: return "reply";
    }
    return "skip";
}

inline constexpr int kMoodMin = 0;
inline constexpr int kMoodMax = 4;
inline constexpr int kMoodBuckets = 3;

// 0-1 -> 0, 2 -> 1, 3-4 -> 2
inline int mood_bucket(int mood) { return mood <= 1 ? 0 : (mood == 2 ? 1 : 2); }

struct ActionProbs {
    double reply = 0.0;
    double like = 0.0;
    double skip = 1.0;

    double engage() const noexcept { return reply + like; }
};

// Mood moves by pos * #positive + neg * #negative + sponsored * #sponsored
// + reversion * (baseline - mood) seen in one feed, stochastically rounded.
struct MoodWeights {
    double positive = 0.0;
    double negative = 0.0;
    double sponsored = 0.0;
    double reversion = 0.0;
    double baseline = 2.0;
};

struct TypeKernel {
    // cells[valence][bucket]
    std::array<std::array<ActionProbs, kMoodBuckets>, 3> cells{};
    MoodWeights mood{};
    int initial_mood = 2;

    const ActionProbs& cell(Valence v, int mood_value) const {
        return cells[static_cast<std::size_t>(v)][static_cast<std::size_t>(mood_bucket(mood_value))];
    }
};

struct BehaviorKernel {
    TypeKernel human;
    TypeKernel ai;

    const TypeKernel& of(bool is_human) const noexcept { return is_human ? human : ai; }
    TypeKernel& of(bool is_human) noexcept { return is_human ? human : ai; }

    void validate() const {
        for (const TypeKernel* k : {&human, &ai}) {
            for (const auto& row : k->cells)
                for (const auto& c : row) {
                    mixsim::detail::require(c.reply >= 0.0 && c.like >= 0.0 && c.skip >= 0.0,
                                    "kernel probabilities must be non-negative");
                    mixsim::detail::require(std::abs(c.reply + c.like + c.skip - 1.0) <= 1e-9,
                                    "kernel action probabilities must sum to 1");
                }
            for (double v : {k->mood.positive, k->mood.negative, k->mood.sponsored, k->mood.reversion,
                             k->mood.baseline})
                mixsim::detail::require(std::isfinite(v), "kernel mood weights must be finite");
            mixsim::detail::require(k->initial_mood >= kMoodMin && k->initial_mood <= kMoodMax,
                            "initial mood must lie in 0..4");
        }
    }

    static BehaviorKernel all(Action a) {
        ActionProbs p{a == Action::reply ? 1.0 : 0.0, a == Action::like ? 1.0 : 0.0, a == Action::skip ? 1.0 : 0.0};
        BehaviorKernel k;
        for (TypeKernel* t : {&k.human, &k.ai})
            for (auto& row : t->cells) row.fill(p);
        return k;
    }

    static BehaviorKernel defaults();
};

namespace detail {

inline ActionProbs probs(double reply, double like) { return {reply, like, 1.0 - reply - like}; }

}  // namespace detail

// Calibrated so that under the benchmark design the human ground-truth effect
// sits near +0.5, the AI effect near -0.4 and the population average near 0,
// while a sponsored slot changes same-round engagement only slightly.
inline BehaviorKernel BehaviorKernel::defaults() {
    using detail::probs;
    BehaviorKernel k;
    auto& h = k.human;
    h.cells[0] = {probs(0.10, 0.20), probs(0.15, 0.30), probs(0.21, 0.37)};
    h.cells[1] = {probs(0.08, 0.12), probs(0.12, 0.18), probs(0.16, 0.22)};
    h.cells[2] = {probs(0.10, 0.22), probs(0.13, 0.27), probs(0.18, 0.35)};
    h.mood = {0.15, -0.10, 0.90, 0.50, 2.0};
    h.initial_mood = 2;

    auto& a = k.ai;
    a.cells[0] = {probs(0.06, 0.11), probs(0.06, 0.14), probs(0.10, 0.20)};
    a.cells[1] = {probs(0.30, 0.20), probs(0.38, 0.20), probs(0.45, 0.22)};
    a.cells[2] = {probs(0.08, 0.14), probs(0.10, 0.18), probs(0.14, 0.22)};
    a.mood = {-0.10, 0.10, -0.50, 0.50, 2.0};
    a.initial_mood = 2;
    return k;
}

// Expected non-skip count for a feed at a given mood.
template <class Feed>
double expected_engagement(const BehaviorKernel& k, bool human, const Feed& valences, int mood) {
    double e = 0.0;
    for (Valence v : valences) e += k.of(human).cell(v, mood).engage();
    return e;
}

}  // namespace mixsim::agentsim
