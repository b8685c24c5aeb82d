#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace peec {

enum class ErrorCode {
  // Configuration / validation.
  DimensionMismatch,
  NotPositiveDefinite,
  NonFiniteEntry,
  NonPositiveHorizon,
  NegativePrice,
  ParseError,
  SchemaError,
  InvalidPlan,
  NotSubset,
  OutOfRange,
  UnsupportedLayout,
  IoError,
  // Numerical failures.
  FiniteEscape,
  NotDominantSpec,
  NoConvergence,
  NotObservable,
  ChainBroken,
  ZeroCost,
  NoBracket,
};

std::string_view to_string(ErrorCode code);

// True for failures of the numerics (as opposed to bad input).
bool is_numeric_failure(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code),
        detail_(detail) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace peec
