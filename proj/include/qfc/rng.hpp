#pragma once

#include <cstdint>

namespace qfc {

/// splitmix64 finalizer: the standard avalanche mix of a 64-bit word.
inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
}

/// splitmix64 stream. Small, fast, and stable across platforms and
/// versions, which the replay and shot-report contracts depend on.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix64(state_);
    }

    /// Uniform double in [0, 1) from the top 53 bits.
    double next_double() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

private:
    std::uint64_t state_;
};

/// Per-shot stream seed: shot i of master seed s starts a SplitMix64 at
/// mix64(s + (i + 1) * 0x9E3779B97F4A7C15). Shots are independent of
/// execution order, so reports never depend on scheduling.
inline std::uint64_t shot_seed(std::uint64_t seed, std::uint64_t shot_index) {
    return mix64(seed + (shot_index + 1) * 0x9E3779B97F4A7C15ULL);
}

} // namespace qfc
