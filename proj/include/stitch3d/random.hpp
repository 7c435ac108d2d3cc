#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

#include "stitch3d/error.hpp"

namespace stitch3d {

// Mixes a seed with salts into a fresh seed (splitmix64 finalizer). Used to
// derive independent, reproducible streams, e.g. one per (seed, hypothesis,
// sample) triple.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0) {
    auto split = [](std::uint64_t& state) {
        state += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    std::uint64_t state = seed;
    std::uint64_t out = split(state);
    state ^= a;
    out ^= split(state);
    state ^= b;
    out ^= split(state);
    return out;
}

// Seeded random source with pinned output distributions. All sampling goes
// through explicit arithmetic on mt19937_64 words, never through standard
// library distribution objects, so a given seed produces the same stream on
// every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t u64() { return gen_(); }

    // Unbiased integer in [0, n) by rejection.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) fail_invalid("Rng::below: n must be positive");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v = gen_();
        while (v >= limit) v = gen_();
        return v % n;
    }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    // Standard normal via Box-Muller; draws exactly two uniforms per call.
    double normal() {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Index drawn with probability proportional to the (non-negative) weights.
    int weighted_pick(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) {
            if (w < 0.0) fail_invalid("Rng::weighted_pick: negative weight");
            total += w;
        }
        if (total <= 0.0) fail_invalid("Rng::weighted_pick: all weights zero");
        double r = uniform() * total;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            r -= weights[i];
            if (r < 0.0) return static_cast<int>(i);
        }
        return static_cast<int>(weights.size() - 1);  // r landed on the total
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace stitch3d
