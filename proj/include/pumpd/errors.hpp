#pragma once

#include <stdexcept>
#include <string>

namespace pumpd {

// Configuration / input validation failures. CLI exit code 1.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Failures during a solve (divergence, singular systems, geometry errors
// discovered at run time). CLI exit code 2.
struct SolverError : std::runtime_error {
  explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace pumpd
