#pragma once

#include <cstdint>
#include <random>

#include "spadsim/units.hpp"

namespace spadsim {

// One named random substream. mt19937_64 seeded with a single value is fully
// specified by the standard, so sequences are identical across platforms.
// Uniforms are mapped from the raw 64-bit output by hand (53-bit mantissa)
// because uniform_real_distribution's output is implementation-defined.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : gen_(seed) {}

    // uniform in [0, 1)
    double next_unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    std::uint64_t next_raw() { return gen_(); }

private:
    std::mt19937_64 gen_;
};

// Exponential inter-arrival gap, rounded to the ps grid. The clamp to 1 ps
// keeps arrival times strictly increasing within a stream at any rate.
picoseconds next_poisson_gap(RngStream& s, double rate_hz);

// The four substreams an engine run consumes. Decorrelated by construction:
// each is seeded from (seed, label) through a splitmix64 mix, so drawing more
// from one stream never shifts another.
struct RngStreams {
    RngStream photon;
    RngStream dark;
    RngStream thinning;
    RngStream afterpulse;

    static RngStreams make(std::uint64_t seed);
};

// splitmix64 finalizer; also used to derive per-sweep-point child seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t label);

}  // namespace spadsim
