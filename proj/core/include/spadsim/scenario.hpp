#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spadsim/config.hpp"
#include "spadsim/csv.hpp"

namespace spadsim {

inline constexpr const char* kVersion = "1.0.0";

struct ScenarioInfo {
    std::string name;
    std::string description;
};

struct ScenarioResult {
    Table table;
    std::optional<Table> aux;  // second output file when a scenario has one
    std::string aux_name;      // suffix for the aux CSV, e.g. "trace"
    std::vector<std::pair<std::string, double>> stats;
};

const std::vector<ScenarioInfo>& scenario_list();
bool scenario_exists(const std::string& name);

// Runs one named scenario; the result is a pure function of (config, name).
ScenarioResult run_scenario(const std::string& name, const ScenarioConfig& config);

// Bias supply granularity: emitted voltages are exact multiples of the step.
class BiasController {
public:
    BiasController() = default;
    BiasController(double v_min, double v_max, double step);

    double v_min() const { return static_cast<double>(lo_) * step_; }
    double v_max() const { return static_cast<double>(hi_) * step_; }
    double step() const { return step_; }

    double quantize(double request) const;  // nearest step, clamped to range
    long index_of(double quantized) const;
    double at_index(long index) const;
    long min_index() const { return lo_; }
    long max_index() const { return hi_; }

private:
    long lo_ = 0;
    long hi_ = 30000;
    double step_ = 0.010;
};

// Binary search over quantized bias for the lowest setting whose dark count
// rate reaches the threshold. seed_salt decorrelates the probe runs from
// other sweeps under the same config seed.
double find_breakdown(const ScenarioConfig& config, double t_case,
                      double dark_threshold_hz, const BiasController& bias,
                      std::uint64_t seed_salt);  // throws sim_error if never reached

}  // namespace spadsim
