#pragma once

#include <cmath>
#include <cstdint>

namespace spadsim {

// Simulation clock: unsigned 64-bit picoseconds. Covers ~213 days of
// simulated time, far beyond any run here, with no rounding drift.
using picoseconds = std::uint64_t;

inline constexpr double kPsPerSecond = 1e12;

inline picoseconds ps_from_seconds(double s) {
    return static_cast<picoseconds>(std::llround(s * kPsPerSecond));
}

inline double seconds_from_ps(picoseconds t) {
    return static_cast<double>(t) / kPsPerSecond;
}

}  // namespace spadsim
