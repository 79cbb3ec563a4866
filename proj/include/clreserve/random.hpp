#pragma once

#include <cstdint>
#include <random>

namespace clreserve {

// splitmix64: cheap, well-mixed 64-bit stream used to derive independent
// seeds from a master seed. Fixed constants, stable across platforms.
inline uint64_t splitmix64(uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Derives a child seed from (master, a, b). Used for per-(step, member)
// training seeds and per-claim simulation seeds so runs are reproducible
// and streams do not overlap.
inline uint64_t derive_seed(uint64_t master, uint64_t a, uint64_t b = 0) {
    uint64_t s = master;
    uint64_t h = splitmix64(s);
    s ^= a * 0xD6E8FEB86659FD93ULL;
    h ^= splitmix64(s);
    s ^= b * 0xA5CB3F6E12C4D091ULL;
    h ^= splitmix64(s);
    return h;
}

inline std::mt19937_64 make_rng(uint64_t seed) {
    return std::mt19937_64(seed);
}

} // namespace clreserve
