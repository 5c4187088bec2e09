#pragma once

#include <cmath>
#include <cstdint>

namespace irsim {

// Deterministic counter-based PRNG (splitmix64). All variates are produced
// by explicit integer arithmetic and fixed float transforms, so streams are
// bit-reproducible across platforms and standard libraries. Identifier
// recorded in output metadata: "splitmix64-v1".
class Rng {
public:
    static constexpr const char* kAlgorithm = "splitmix64-v1";

    explicit Rng(std::uint64_t seed) : state_(seed) {}

    // Independent substream derived from (seed, stream id). Streams with
    // distinct ids are decorrelated by the mix function.
    static Rng stream(std::uint64_t seed, std::uint64_t id) {
        return Rng(mix(seed ^ mix(id + 0x9E3779B97F4A7C15ull)));
    }

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        return mix(state_);
    }

    // Uniform in [0,1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Inclusive integer range. Modulo bias is negligible for the small
    // ranges drawn here (< 2^-40).
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
    }

    bool bernoulli(double p) { return uniform() < p; }

    int sign() { return bernoulli(0.5) ? 1 : -1; }

    // One Box-Muller variate per call (cosine branch only, no cached state).
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
    }

    double normal(double mu, double sigma) { return mu + sigma * normal(); }

private:
    static constexpr double kTwoPi = 6.28318530717958647692;

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

} // namespace irsim
