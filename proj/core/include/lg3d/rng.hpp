#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace lg3d {

// splitmix64; used both as a seed mixer and to bootstrap engine state.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = a ^ (0x2545f4914f6cdd1dULL + (b << 1));
    std::uint64_t h = splitmix64(s);
    return h ^ b;
}

// Stream tags keep independently consumed random streams from aliasing each
// other: changing how many draws one purpose consumes never shifts another.
enum class SeedPurpose : std::uint64_t {
    param_init = 1,
    shuffle = 2,
    subsample = 3,
    augment = 4,
    scene_gen = 5,
    eval_subsample = 6,
};

inline std::uint64_t derive_seed(std::uint64_t root, SeedPurpose purpose,
                                 std::initializer_list<std::uint64_t> path = {}) {
    std::uint64_t h = mix_seed(root, static_cast<std::uint64_t>(purpose));
    for (std::uint64_t p : path) h = mix_seed(h, p);
    return h;
}

// Deterministic RNG. Distribution sampling is implemented here rather than
// via std::*_distribution, whose output is implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // uniform in [0, 1)
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n), n >= 1; rejection sampling keeps it unbiased
    std::uint64_t uniform_index(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x = next_u64();
        while (x >= limit) x = next_u64();
        return x % n;
    }

    // Box-Muller; consumes two uniforms per pair, caches the second
    double normal(double mean = 0.0, double sigma = 1.0) {
        if (has_spare_) {
            has_spare_ = false;
            return mean + sigma * spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return mean + sigma * r * std::cos(theta);
    }

    Rng split(std::uint64_t child) const { return Rng(mix_seed(seed_, child)); }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace lg3d
