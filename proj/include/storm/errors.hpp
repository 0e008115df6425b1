#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace storm {

// Invalid or inconsistent user-supplied configuration.
struct ConfigError : std::invalid_argument {
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// Requested accuracy cannot be met by any finite sample size (e.g. eps_f = 0
// with a noisy oracle, or a probability target of 1 with nonzero variance).
struct InfeasibleError : std::runtime_error {
  explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

// A sample-size rule asked for more draws than the configured cap allows.
struct BudgetError : std::runtime_error {
  BudgetError(const std::string& what, double required, double cap)
      : std::runtime_error(what), required_samples(required), budget_cap(cap) {}
  double required_samples;
  double budget_cap;
};

// The oracle lacks a capability the caller needs (e.g. gradient draws).
struct CapabilityError : std::runtime_error {
  explicit CapabilityError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite values where finite ones are required.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace storm
