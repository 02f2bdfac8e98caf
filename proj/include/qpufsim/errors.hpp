#pragma once

#include <stdexcept>
#include <string>

namespace qpufsim {

// Exit-code mapping used by the CLI: 2=config, 3=budget, 4=numeric, 5=refusal.

// Bad scenario parameters, malformed files, unsupported combinations.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Device query budget exhausted (the polynomial learning-phase cap).
struct QueryBudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Eigensolver non-convergence, norm violations and similar.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Request exceeds a deliberate scale limit (brute-force oracles, formula domains).
struct RefusalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Caller bug: mismatched operand dimensions. Not reachable from a valid scenario.
struct DimensionMismatch : std::logic_error {
  using std::logic_error::logic_error;
};

}  // namespace qpufsim
