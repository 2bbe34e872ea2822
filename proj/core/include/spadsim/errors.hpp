#pragma once

#include <stdexcept>
#include <string>

namespace spadsim {

// Invalid parameter set or config text. The CLI maps this to exit code 1.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// Failure while running a simulation or scenario. CLI exit code 2.
struct sim_error : std::runtime_error {
    explicit sim_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace spadsim
