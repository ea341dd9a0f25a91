#pragma once

#include <stdexcept>
#include <string>

namespace slicer {

// Exit-code taxonomy used by the CLI: config/usage -> 2, numerical -> 3,
// optimizer cap -> 4, calibration mismatch -> 5.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised when an adiabaticity metric is requested for a pulse that crosses
// resonance with zero coupling (the metric diverges).
struct NonAdiabaticError : NumericError {
    explicit NonAdiabaticError(const std::string& msg) : NumericError(msg) {}
};

struct OptimizerCapError : std::runtime_error {
    explicit OptimizerCapError(const std::string& msg) : std::runtime_error(msg) {}
};

struct CalibrationError : std::runtime_error {
    explicit CalibrationError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace slicer
