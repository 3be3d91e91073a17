#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace skmors {

// Substream derivation: fold stream labels into a root seed with SplitMix64.
// Streams keyed by different label tuples are statistically independent, and a
// design's replication stream does not depend on the order in which other
// designs are sampled.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t substream_seed(std::uint64_t root, std::uint64_t a, std::uint64_t b = 0,
                                    std::uint64_t c = 0) {
    std::uint64_t s = splitmix64(root ^ 0x6a09e667f3bcc909ULL);
    s = splitmix64(s ^ a);
    s = splitmix64(s ^ b);
    s = splitmix64(s ^ c);
    return s;
}

inline std::mt19937_64 make_stream(std::uint64_t root, std::uint64_t a, std::uint64_t b = 0,
                                   std::uint64_t c = 0) {
    return std::mt19937_64(substream_seed(root, a, b, c));
}

/// Uniform double in [0, 1).
inline double uniform01(std::mt19937_64& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

inline double uniform_in(std::mt19937_64& eng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(eng);
}

/// Standard normal draw via Box-Muller (stateless, portable across standard libraries).
inline double normal01(std::mt19937_64& eng) {
    double u1 = uniform01(eng);
    while (u1 <= 0.0) u1 = uniform01(eng);
    const double u2 = uniform01(eng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
}

} // namespace skmors
