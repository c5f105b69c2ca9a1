#pragma once
// Prompt rendering and response parsing for an external text-generation
// backend. The rule-based simulator never calls this; it exists so that a
// language-model engine can be plugged in behind the same platform loop.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "mixsim/agentsim/kernel.hpp"
#include "mixsim/agentsim/persona.hpp"
#include "mixsim/agentsim/prompt_assets.hpp"

namespace mixsim::agentsim {

enum class TemplateId { human_personality, ai_personality, base, treatment_thread, seed_human, seed_ai, feed_response };

inline constexpr std::array<TemplateId, 7> kAllTemplates = {
    TemplateId::human_personality, TemplateId::ai_personality, TemplateId::base,         TemplateId::treatment_thread,
    TemplateId::seed_human,        TemplateId::seed_ai,        TemplateId::feed_response,
};

inline std::string_view to_string(TemplateId id) {
    switch (id) {
    case TemplateId::human_personality: return "human_personality";
    case TemplateId::ai_personality: return "ai_personality";
    case TemplateId::base: return "base";
    case TemplateId::treatment_thread: return "treatment_thread";
    case TemplateId::seed_human: return "seed_human";
    case TemplateId::seed_ai: return "seed_ai";
    case TemplateId::feed_response: return "feed_response";
    }
    return "base";
}

inline TemplateId template_from_string(std::string_view s) {
    for (TemplateId id : kAllTemplates)
        if (to_string(id) == s) return id;
    throw ConfigError("unknown template id '" + std::string(s) + "'");
}

inline std::string_view template_text(TemplateId id) {
    switch (id) {
    case TemplateId::human_personality: return assets::human_personality;
    case TemplateId::ai_personality: return assets::ai_personality;
    case TemplateId::base: return assets::base;
    case TemplateId::treatment_thread: return assets::treatment_thread;
    case TemplateId::seed_human: return assets::seed_human;
    case TemplateId::seed_ai: return assets::seed_ai;
    case TemplateId::feed_response: return assets::feed_response;
    }
    return {};
}

using Bindings = std::map<std::string, std::string, std::less<>>;

// Replaces {key} for every bound key. Any remaining {identifier} is an error;
// other braces (the JSON example) pass through.
inline std::string render(std::string_view tmpl, const Bindings& b) {
    auto is_ident = [](char c) { return (c >= 'a' && c <= 'z') || c == '_'; };
    std::string out;
    out.reserve(tmpl.size());
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{') {
            std::size_t j = i + 1;
            while (j < tmpl.size() && is_ident(tmpl[j])) ++j;
            if (j > i + 1 && j < tmpl.size() && tmpl[j] == '}') {
                const auto key = tmpl.substr(i + 1, j - i - 1);
                auto it = b.find(key);
                if (it == b.end()) throw ConfigError("unbound template placeholder {" + std::string(key) + "}");
                out += it->second;
                i = j + 1;
                continue;
            }
        }
        out += tmpl[i++];
    }
    return out;
}

inline Bindings persona_bindings(const Persona& p) {
    return {{"name", p.name},
            {"age", std::to_string(p.age)},
            {"gender", p.gender},
            {"occupation", p.occupation},
            {"interests", p.interests_joined()}};
}

struct ReplyView {
    std::string author;
    std::string text;
};

// What a user sees of one thread.
struct ThreadView {
    int id = 0;
    std::string author;
    std::string text;
    int reply_count = 0;
    std::vector<ReplyView> recent;   // newest first, at most 5 shown
    bool sponsored = false;
};

inline std::string format_thread(const ThreadView& t) {
    if (t.sponsored) return std::string(assets::treatment_thread);
    std::string s = "Thread #" + std::to_string(t.id) + " by " + t.author + ":\n";
    s += "  \"" + t.text + "\"\n";
    s += "  [" + std::to_string(t.reply_count) + " replies]";
    if (!t.recent.empty()) {
        s += " Recent replies:";
        for (std::size_t k = 0; k < t.recent.size() && k < 5; ++k)
            s += "\n    - " + t.recent[k].author + ": \"" + t.recent[k].text + "\"";
    }
    return s;
}

struct MatchProfile {
    std::string name;
    int age = 30;
    std::string occupation;
    std::string interests;
};

struct LlmRequest {
    TemplateId template_id = TemplateId::base;
    std::string prompt;
    double temperature = 1.0;
};

inline double temperature_for(bool human) { return human ? 1.0 : 0.2; }

// Full engagement prompt: base, personality paragraph, then feed and
// response format.
inline std::string engagement_prompt(const Persona& p, const std::vector<ThreadView>& feed, int mood, int round,
                                     const MatchProfile& match, std::optional<bool> human_override = {}) {
    mixsim::detail::require(mood >= kMoodMin && mood <= kMoodMax, "mood must lie in 0..4");
    const bool human = human_override.value_or(p.human);
    Bindings b = persona_bindings(p);
    b["round_num"] = std::to_string(round);
    b["prev_mood"] = std::to_string(mood);
    std::string threads;
    for (std::size_t k = 0; k < feed.size(); ++k) {
        if (k) threads += "\n\n";
        threads += format_thread(feed[k]);
    }
    Bindings fb{{"threads", threads},
                {"match_name", match.name},
                {"match_age", std::to_string(match.age)},
                {"match_occupation", match.occupation},
                {"match_interests", match.interests}};
    return render(template_text(TemplateId::base), b) + "\n\n" +
           std::string(template_text(human ? TemplateId::human_personality : TemplateId::ai_personality)) + "\n\n" +
           render(template_text(TemplateId::feed_response), fb);
}

// Builds the request for a template id. Engagement ids (base and the two
// personalities) yield the full feed prompt; seed ids yield the seed-post
// prompts; treatment_thread yields the sponsored thread block.
inline LlmRequest llm_backend_request(TemplateId id, const Persona& p, const std::vector<ThreadView>& feed, int mood,
                                      int round = 1, const MatchProfile& match = {}) {
    LlmRequest r;
    r.template_id = id;
    r.temperature = temperature_for(p.human);
    switch (id) {
    case TemplateId::seed_human:
        r.prompt = render(template_text(id), persona_bindings(p));
        r.temperature = temperature_for(true);
        break;
    case TemplateId::seed_ai:
        r.prompt = render(template_text(id), persona_bindings(p));
        r.temperature = temperature_for(false);
        break;
    case TemplateId::treatment_thread:
        r.prompt = std::string(template_text(id));
        break;
    case TemplateId::human_personality:
        r.prompt = engagement_prompt(p, feed, mood, round, match, true);
        r.temperature = temperature_for(true);
        break;
    case TemplateId::ai_personality:
        r.prompt = engagement_prompt(p, feed, mood, round, match, false);
        r.temperature = temperature_for(false);
        break;
    case TemplateId::base:
    case TemplateId::feed_response:
        r.prompt = engagement_prompt(p, feed, mood, round, match);
        break;
    }
    return r;
}

class ResponseSchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ResponseRangeError : public ResponseSchemaError {
public:
    using ResponseSchemaError::ResponseSchemaError;
};

struct ThreadAction {
    int thread_id = 0;
    Action action = Action::skip;
    std::string reply_text;
};

struct LlmResponse {
    std::vector<ThreadAction> threads;
    int mood_after_feed = 0;
    int date_interest = 0;
    std::string reasoning;

    int engagement() const {
        int e = 0;
        for (const auto& t : threads) e += t.action != Action::skip;
        return e;
    }
};

namespace detail {

inline int score_field(const nlohmann::json& j, const char* key) {
    if (!j.contains(key)) throw ResponseSchemaError(std::string("response lacks '") + key + "'");
    const auto& v = j.at(key);
    if (!v.is_number_integer()) throw ResponseSchemaError(std::string("'") + key + "' must be an integer");
    const auto x = v.get<long long>();
    if (x < 0 || x > 4) throw ResponseRangeError(std::string("'") + key + "' = " + std::to_string(x) + " outside 0..4");
    return static_cast<int>(x);
}

}  // namespace detail

// Strict parse of the documented response object. expected_threads <= 0
// skips the length check.
inline LlmResponse parse_llm_response(std::string_view text, int expected_threads = 4) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ResponseSchemaError(std::string("response is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ResponseSchemaError("response must be a JSON object");
    if (!j.contains("threads") || !j.at("threads").is_array())
        throw ResponseSchemaError("response lacks a 'threads' array");

    LlmResponse r;
    for (const auto& t : j.at("threads")) {
        if (!t.is_object()) throw ResponseSchemaError("thread entries must be objects");
        if (!t.contains("thread_id") || !t.at("thread_id").is_number_integer())
            throw ResponseSchemaError("thread entry lacks an integer 'thread_id'");
        if (!t.contains("action") || !t.at("action").is_string())
            throw ResponseSchemaError("thread entry lacks an 'action'");
        ThreadAction a;
        a.thread_id = t.at("thread_id").get<int>();
        const auto act = t.at("action").get<std::string>();
        if (act == "reply") a.action = Action::reply;
        else if (act == "like") a.action = Action::like;
        else if (act == "skip") a.action = Action::skip;
        else throw ResponseSchemaError("unknown action '" + act + "'");
        if (t.contains("reply_text")) {
            if (!t.at("reply_text").is_string()) throw ResponseSchemaError("'reply_text' must be a string");
            a.reply_text = t.at("reply_text").get<std::string>();
        } else if (a.action == Action::reply) {
            throw ResponseSchemaError("reply action without 'reply_text'");
        }
        r.threads.push_back(std::move(a));
    }
    if (expected_threads > 0 && r.threads.size() != static_cast<std::size_t>(expected_threads))
        throw ResponseSchemaError("expected " + std::to_string(expected_threads) + " thread actions, got " +
                                  std::to_string(r.threads.size()));
    r.mood_after_feed = detail::score_field(j, "mood_after_feed");
    r.date_interest = detail::score_field(j, "date_interest");
    if (j.contains("reasoning")) {
        if (!j.at("reasoning").is_string()) throw ResponseSchemaError("'reasoning' must be a string");
        r.reasoning = j.at("reasoning").get<std::string>();
    }
    return r;
}

// Backend contract: take a request, return the raw model text.
class TextBackend {
public:
    virtual ~TextBackend() = default;
    virtual std::string complete(const LlmRequest& request) = 0;
};

}  // namespace mixsim::agentsim
