#pragma once

#include <cstdint>

namespace pastegen {

// splitmix64 finalizer (Steele/Lea/Flood). Bijective on 64-bit values.
inline std::uint64_t splitmix64_mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t kSeedGamma = 0x9E3779B97F4A7C15ULL;

/// Scene seed = splitmix64_mix(master_seed + (index+1) * gamma).
/// gamma is odd, so the pre-mix value is injective in index and the finalizer
/// is a bijection: distinct indices always get distinct seeds, and changing
/// the master seed changes the seed at every index. Stable across runs,
/// platforms, and worker counts.
inline std::uint64_t derive_scene_seed(std::uint64_t master_seed, std::uint64_t scene_index) {
    return splitmix64_mix(master_seed + (scene_index + 1) * kSeedGamma);
}

/// xoshiro256++ (Blackman/Vigna, public domain), seeded from a single 64-bit
/// value via a splitmix64 sequence. Self-contained so the draw sequence never
/// depends on standard-library distribution internals.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) {
            sm += kSeedGamma;
            word = splitmix64_mix(sm);
        }
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [0, n). Fixed-point multiply of a full 64-bit draw;
    /// bias is at most n/2^64.
    std::uint64_t uniform_index(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    /// Uniform integer in [lo, hi], inclusive.
    long long uniform_int(long long lo, long long hi) {
        return lo + static_cast<long long>(
                        uniform_index(static_cast<std::uint64_t>(hi - lo) + 1));
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4] = {};
};

} // namespace pastegen
