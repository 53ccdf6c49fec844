#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace roademd {

// Input fails structural validation: bad lengths, unknown ids, malformed files.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// The problem itself has no solution: unequal total masses, unreachable demand.
class InfeasibleError : public std::runtime_error {
 public:
  explicit InfeasibleError(const std::string& msg) : std::runtime_error(msg) {}
};

// A solver stopped without certifying the requested tolerance.
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& msg,
                       double achieved_gap = std::numeric_limits<double>::quiet_NaN())
      : std::runtime_error(msg), achieved_gap(achieved_gap) {}

  double achieved_gap;
};

}  // namespace roademd
