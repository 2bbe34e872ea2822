#pragma once

#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "spadsim/device_model.hpp"
#include "spadsim/quench.hpp"
#include "spadsim/units.hpp"

namespace spadsim {

// One complete detector run: device physics, quench front end, photon and
// dark generation, afterpulsing, optional thermal feedback.
struct SimConfig {
    SpadParams spad;
    QuenchMode mode = QuenchMode::active;
    ActiveQuenchParams active;
    PassiveQuenchParams passive;

    double v_bias = 228.5;  // V
    double t_case = 20.0;   // degC; chip starts at case temperature

    // When enabled, every avalanche deposits heat and the chip temperature
    // (hence breakdown, overvoltage, efficiency, dark rate) evolves; when
    // disabled the chip tracks the case exactly.
    bool thermal_feedback = false;

    double photon_rate = 0.0;  // Hz offered at the detector
    // Piecewise-constant source program: at each time, switch to the given
    // rate. Applied in addition to the initial photon_rate.
    std::vector<std::pair<picoseconds, double>> photon_schedule;

    // Non-negative forces detection efficiency, bypassing the device curve;
    // useful for exercising the quench timing alone.
    double de_override = -1.0;

    double duration_s = 1.0;
    double sample_interval_s = 0.0;  // >0 records periodic samples
    bool record_pulses = true;
    std::uint64_t seed = 1;

    void validate() const;  // throws config_error
};

struct SampleRecord {
    picoseconds time;       // end of the sampling bin
    std::uint64_t pulses;   // output pulses inside the bin
    double t_chip;          // degC at the bin boundary
};

struct SimResult {
    std::uint64_t n_pulses = 0;
    std::uint64_t n_photons_offered = 0;   // photon arrivals before thinning
    std::uint64_t n_photon_pulses = 0;
    std::uint64_t n_dark_pulses = 0;
    std::uint64_t n_afterpulse_pulses = 0;
    std::uint64_t n_suppressed = 0;        // carriers lost to dead time or recovery
    bool latched = false;
    double final_t_chip = 0.0;
    picoseconds min_pulse_gap = std::numeric_limits<picoseconds>::max();
    std::vector<picoseconds> pulses;       // filled when record_pulses
    std::vector<SampleRecord> samples;     // filled when sample_interval_s > 0
};

SimResult run_simulation(const SimConfig& config);

}  // namespace spadsim
