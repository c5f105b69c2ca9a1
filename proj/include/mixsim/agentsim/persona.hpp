#pragma once
// User profiles for the rule-based platform. Profiles only feed the prompt
// templates; the behavior kernel looks at the latent type and the mood.

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mixsim/rng.hpp"

namespace mixsim::agentsim {

inline constexpr std::array<std::string_view, 16> kOccupations = {
    "software engineer", "nurse",     "teacher",        "graphic designer", "accountant", "chef",
    "marketing manager", "pharmacist", "architect",     "journalist",       "electrician", "physiotherapist",
    "data analyst",      "lawyer",    "photographer",   "veterinarian",
};

inline constexpr std::array<std::string_view, 24> kInterests = {
    "hiking",   "cooking",     "photography", "travel",     "reading",  "yoga",
    "gaming",   "live music",  "painting",    "running",    "cycling",  "board games",
    "film",     "gardening",   "dancing",     "coffee",     "climbing", "podcasts",
    "baking",   "volunteering", "swimming",   "languages",  "theater",  "camping",
};

inline constexpr std::array<std::string_view, 20> kFirstNames = {
    "Alex",  "Jordan", "Taylor", "Morgan", "Casey", "Riley",  "Jamie", "Avery", "Quinn", "Drew",
    "Sam",   "Robin",  "Charlie", "Emerson", "Hayden", "Parker", "Reese", "Rowan", "Sage", "Skyler",
};

inline constexpr std::array<std::string_view, 3> kGenders = {"woman", "man", "non-binary person"};

struct Persona {
    std::string name;
    std::string gender;
    int age = 20;
    std::string occupation;
    std::array<std::string, 4> interests;
    bool human = true;   // latent

    std::string interests_joined() const {
        std::string s;
        for (std::size_t k = 0; k < interests.size(); ++k) {
            if (k) s += ", ";
            s += interests[k];
        }
        return s;
    }

    bool operator==(const Persona&) const = default;
};

// Names get the unit id appended so they stay unique within a platform.
inline Persona sample_persona(std::size_t id, bool human, Engine& eng) {
    auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(eng); };
    Persona p;
    p.human = human;
    p.name = std::string(kFirstNames[pick(kFirstNames.size())]) + "_" + std::to_string(id);
    p.gender = std::string(kGenders[pick(kGenders.size())]);
    p.age = std::uniform_int_distribution<int>(20, 40)(eng);
    p.occupation = std::string(kOccupations[pick(kOccupations.size())]);
    std::vector<std::string_view> chosen;
    std::sample(kInterests.begin(), kInterests.end(), std::back_inserter(chosen), 4, eng);
    for (std::size_t k = 0; k < 4; ++k) p.interests[k] = std::string(chosen[k]);
    return p;
}

}  // namespace mixsim::agentsim
