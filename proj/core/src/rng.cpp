#include "spadsim/rng.hpp"

#include <cmath>

namespace spadsim {

// splitmix64 finalizer over seed and label; decorrelates substreams drawn
// from one user seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t label) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (label + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

RngStreams RngStreams::make(std::uint64_t seed) {
    return RngStreams{RngStream(mix_seed(seed, 0)), RngStream(mix_seed(seed, 1)),
                      RngStream(mix_seed(seed, 2)), RngStream(mix_seed(seed, 3))};
}

picoseconds next_poisson_gap(RngStream& s, double rate_hz) {
    const double u = s.next_unit();
    const double gap_s = -std::log1p(-u) / rate_hz;
    // Effectively-never for vanishing rates; keeps the event time inside the
    // u64 picosecond range.
    if (!(gap_s < 9.0e6)) return static_cast<picoseconds>(9'000'000'000'000'000'000ULL);
    const auto ps = static_cast<picoseconds>(std::llround(gap_s * kPsPerSecond));
    return ps == 0 ? picoseconds{1} : ps;
}

}  // namespace spadsim
