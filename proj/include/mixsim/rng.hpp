#pragma once

#include <cstdint>
#include <random>

namespace mixsim {

using Engine = std::mt19937_64;

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Tags separating the random substreams of one experiment instance.
enum class Stream : std::uint64_t {
    types = 1,
    priors,
    init,
    noise,
    time_noise,
    interference_row,
    treatment,
    batches,
    platform,
    user_round,
    mood_init,
};

// Derives independent engines from a master seed and a (stream, a, b) key.
// Every random draw in the library comes from an engine obtained here, so
// results depend only on (inputs, seed) and never on evaluation order
// across units, rounds or threads.
class SeedTree {
public:
    explicit SeedTree(std::uint64_t seed) noexcept : seed_(seed) {}

    std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t derive(Stream s, std::uint64_t a = 0, std::uint64_t b = 0) const noexcept {
        std::uint64_t h = mix64(seed_);
        h = mix64(h ^ static_cast<std::uint64_t>(s));
        h = mix64(h ^ (a * 0xD1B54A32D192ED03ULL));
        h = mix64(h ^ (b * 0x8CB92BA72F3D8DD7ULL));
        return h;
    }

    Engine engine(Stream s, std::uint64_t a = 0, std::uint64_t b = 0) const {
        return Engine(derive(s, a, b));
    }

private:
    std::uint64_t seed_;
};

inline double standard_normal(Engine& eng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    return dist(eng);
}

inline double uniform01(Engine& eng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(eng);
}

}  // namespace mixsim
