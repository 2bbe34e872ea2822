#pragma once

#include <cstdint>
#include <string>

#include "spadsim/device_model.hpp"
#include "spadsim/quench.hpp"

namespace spadsim {

// Everything a scenario needs beyond its own sweep definition: the device,
// both front ends, the calibrated source, and the operating point.
struct ScenarioConfig {
    SpadParams spad;
    ActiveQuenchParams active;
    PassiveQuenchParams passive;
    LedParams led;
    double v_bias = 228.5;        // V
    double t_case = 20.0;         // degC
    double v_over_max = 5.5;      // V, cap for overvoltage sweeps
    double duration_scale = 1.0;  // multiplies every per-point duration
    std::uint64_t seed = 12345;
    int workers = 1;

    void validate() const;  // throws config_error
};

// Flat `key = value` configuration with `#` comments and `[spad]`, `[quench]`,
// `[led]`, `[scenario]` sections. Absent keys keep their defaults; unknown
// keys, syntax errors (reported with line numbers), and out-of-range values
// are rejected.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);  // throws config_error

// The fully resolved configuration in the same format parse_config reads;
// numeric values round-trip exactly.
std::string serialize_config(const ScenarioConfig& config);

}  // namespace spadsim
