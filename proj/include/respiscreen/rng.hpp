#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace respiscreen {

/**
 * Counter-based deterministic randomness built on the splitmix64 finalizer.
 * Every draw is a pure function of (seed, counters), so rendering order and
 * parallel evaluation cannot change results.
 */
namespace rng {

inline uint64_t mix(uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Collapses (seed, frame, pixel) into one well-mixed 64-bit word.
inline uint64_t key(uint64_t seed, uint64_t frame, uint64_t pixel) {
    uint64_t s = mix(seed ^ 0xA0761D6478BD642FULL);
    s = mix(s ^ (frame + 1) * 0xE7037ED1A0B428DBULL);
    s = mix(s ^ (pixel + 1) * 0x8EBC6AF09C88C6E3ULL);
    return s;
}

/// Maps a 64-bit word to [0, 1).
inline double to_unit(uint64_t z) {
    return static_cast<double>(z >> 11) * 0x1.0p-53;
}

/// Standard normal draw for a given (seed, frame, pixel) counter triple.
inline double gaussian(uint64_t seed, uint64_t frame, uint64_t pixel) {
    const uint64_t k = key(seed, frame, pixel);
    // u1 in (0, 1] so the log is finite.
    const double u1 = (static_cast<double>(mix(k) >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = to_unit(mix(k ^ 0xD1B54A32D192ED03ULL));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace rng
}  // namespace respiscreen
