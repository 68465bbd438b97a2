// errors.hpp - exception taxonomy shared by all zenolab modules
#pragma once

#include <stdexcept>
#include <string>

namespace zenolab {

// Violated precondition or broken invariant (dimension mismatch, bad index
// set, inconsistent run spec). Programmer-facing.
struct contract_error : std::invalid_argument {
  explicit contract_error(const std::string& what) : std::invalid_argument(what) {}
};

// Numerics went bad: non-finite input, eigensolver failure, norm blow-up.
struct numeric_error : std::runtime_error {
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

// User-facing configuration problem (bad parameter combination, horizon too
// small, detector placement). Message should be actionable.
struct config_error : std::runtime_error {
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// Amplitude reached the padded boundary of the simulation grid; the run is
// aborted rather than silently losing norm.
struct horizon_error : numeric_error {
  explicit horizon_error(const std::string& what) : numeric_error(what) {}
};

}  // namespace zenolab
