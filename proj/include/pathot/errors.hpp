#pragma once

#include <stdexcept>
#include <string>

namespace pathot {

// Invalid input: malformed files, bad parameters, inconsistent shapes.
struct config_error : std::runtime_error {
  explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Numeric precondition failure: divergent moments, overflow, parameter-set
// violations.
struct numeric_error : std::runtime_error {
  explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Resource cap exceeded (problem too large for the configured limits).
struct resource_error : std::runtime_error {
  explicit resource_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace pathot
