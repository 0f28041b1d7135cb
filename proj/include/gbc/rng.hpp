#pragma once

#include <cstdint>

namespace gbc {

// Counter-based random numbers: every draw is a pure hash of (seed, k1, k2).
// Nothing is stateful, so a lazily grown sequence reproduces identical values
// no matter in which order its pieces were materialized, and parallel workers
// can draw for arbitrary indices without coordination.

// splitmix64 finalizer; full-period 64-bit permutation with strong avalanche.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t k1, std::uint64_t k2 = 0) {
    std::uint64_t h = mix64(seed ^ 0x6a09e667f3bcc909ull);
    h = mix64(h ^ mix64(k1));
    h = mix64(h ^ mix64(k2 ^ 0xbb67ae8584caa73bull));
    return h;
}

// Uniform double in [0, 1) with 53 random bits.
inline double u01(std::uint64_t seed, std::uint64_t k1, std::uint64_t k2 = 0) {
    return static_cast<double>(counter_hash(seed, k1, k2) >> 11) * 0x1.0p-53;
}

}  // namespace gbc
