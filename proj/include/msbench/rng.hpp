#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace msbench {

/// splitmix64 step. Small, fast, and good enough for synthetic pixel data
/// and weight generation. Output sequence is fully determined by the state.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Mixes several values into one 64-bit key. Used to derive independent
/// streams from (seed, index, index) tuples.
inline std::uint64_t mix_key(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t s = a;
    splitmix64_next(s);
    s ^= b + 0x9E3779B97F4A7C15ull;
    splitmix64_next(s);
    s ^= c + 0xC2B2AE3D27D4EB4Full;
    splitmix64_next(s);
    return s;
}

/// Deterministic stream of uniform and normal variates.
///
/// Built on std::mt19937_64 (whose output is pinned by the standard) with
/// our own uniform/Box-Muller transforms, so sequences are bit-identical
/// across platforms and standard-library versions.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    /// Uniform double in [0, 1).
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal variate via Box-Muller; caches the second draw.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) {
            u1 = uniform();
        }
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace msbench
