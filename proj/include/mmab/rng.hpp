#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace mmab {

// Deterministic RNG with named substreams. A run seeded with s derives
// independent streams via substream(s, "env"), substream(s, "player", j), ...
// so player decisions replay identically no matter what the environment or
// other players draw. mt19937_64 keeps the raw stream portable; the
// distributions below avoid std::*_distribution, which is not pinned by the
// standard.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    static Rng substream(std::uint64_t seed, std::string_view label, std::uint64_t index = 0);

    std::uint64_t next() { return gen_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, n), n >= 1, unbiased.
    int uniform_int(int n) {
        const auto un = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % un;
        std::uint64_t x;
        do {
            x = next();
        } while (x >= limit);
        return static_cast<int>(x % un);
    }

    bool bernoulli(double p) { return uniform01() < p; }

private:
    std::mt19937_64 gen_;
};

} // namespace mmab
