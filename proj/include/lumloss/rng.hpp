#ifndef LUMLOSS_RNG_HPP
#define LUMLOSS_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace lumloss {

/**
 * Seeded random source with a platform-fixed output sequence.
 *
 * The engine is std::mt19937_64, whose output is fixed by the C++ standard.
 * The standard distributions are not, so uniform and normal draws are
 * computed here: uniform() takes the top 53 bits, normal() is the
 * Box-Muller transform consuming two uniforms per pair and caching the
 * second variate.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer on [0, n). Uses rejection to stay unbiased.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t r;
        do {
            r = engine_();
        } while (r >= limit);
        return r % n;
    }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        // 1 - uniform() lies in (0, 1], keeping log finite.
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// SplitMix64 finalizer; derives independent sub-seeds from (seed, index).
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Training and evaluation seeds live in disjoint domains: low bit 0 for
// training, low bit 1 for evaluation.
constexpr std::uint64_t train_seed(std::uint64_t run_seed) { return run_seed << 1; }
constexpr std::uint64_t eval_seed(std::uint64_t run_seed) { return (run_seed << 1) | 1u; }

}

#endif
