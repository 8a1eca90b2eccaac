#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace contagion {

// All stochastic code in the library draws from std::mt19937_64 through the
// helpers below. The generator is fully specified by the C++ standard and the
// transformations here avoid std::*_distribution, whose output is
// implementation-defined, so replays are reproducible across platforms.
using Rng = std::mt19937_64;

inline constexpr const char* kRngAlgorithm = "mt19937_64+boxmuller";

// splitmix64; used to derive independent substream seeds from a master seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline int rand_bit(Rng& rng) { return static_cast<int>(rng() >> 63); }

// +1 or -1, equiprobable.
inline int rand_sign(Rng& rng) { return rand_bit(rng) ? 1 : -1; }

// Uniform in [0,1), 53-bit resolution.
inline double rand_unit(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Standard normal via Box-Muller (one deviate per call, no cached state).
inline double rand_gaussian(Rng& rng) {
    double u1 = 0.0;
    do {
        u1 = rand_unit(rng);
    } while (u1 == 0.0);
    const double u2 = rand_unit(rng);
    const double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

inline double rand_gaussian(Rng& rng, double sigma) {
    return sigma <= 0.0 ? 0.0 : sigma * rand_gaussian(rng);
}

}  // namespace contagion
