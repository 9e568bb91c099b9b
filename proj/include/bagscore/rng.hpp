#pragma once

// Deterministic randomness helpers. Everything here is pinned to mt19937
// with explicit bit-level mappings so that streams are identical across
// platforms and standard-library implementations; the std <random>
// distributions and std::shuffle are implementation-defined and must not
// be used anywhere seeds matter.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace bagscore::rng {

using Engine = std::mt19937;

// Uniform double in [0, 1) with 53 random bits (two engine words).
inline double uniform01(Engine& g) {
    const std::uint64_t hi = g() >> 5;  // 27 bits
    const std::uint64_t lo = g() >> 6;  // 26 bits
    return static_cast<double>((hi << 26) | lo) * (1.0 / 9007199254740992.0);
}

inline double uniform_range(Engine& g, double lo, double hi) {
    return lo + (hi - lo) * uniform01(g);
}

// Standard normal via Box-Muller, one variate per call (the sine branch is
// discarded to keep the stream layout simple).
inline double gaussian(Engine& g) {
    const double u1 = 1.0 - uniform01(g);  // (0, 1], keeps log finite
    const double u2 = uniform01(g);
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

// Fisher-Yates with a modulo draw. The modulo bias (< 2^-32 for our sizes)
// is irrelevant next to the determinism requirement.
template <typename T>
void shuffle(std::vector<T>& v, Engine& g) {
    if (v.size() < 2) return;
    for (std::size_t i = v.size() - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(g() % (i + 1));
        std::swap(v[i], v[j]);
    }
}

}  // namespace bagscore::rng
