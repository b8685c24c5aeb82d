#include "peec/error.hpp"

namespace peec {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::NonFiniteEntry: return "NonFiniteEntry";
    case ErrorCode::NonPositiveHorizon: return "NonPositiveHorizon";
    case ErrorCode::NegativePrice: return "NegativePrice";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::InvalidPlan: return "InvalidPlan";
    case ErrorCode::NotSubset: return "NotSubset";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::UnsupportedLayout: return "UnsupportedLayout";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::FiniteEscape: return "FiniteEscape";
    case ErrorCode::NotDominantSpec: return "NotDominantSpec";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NotObservable: return "NotObservable";
    case ErrorCode::ChainBroken: return "ChainBroken";
    case ErrorCode::ZeroCost: return "ZeroCost";
    case ErrorCode::NoBracket: return "NoBracket";
  }
  return "Unknown";
}

bool is_numeric_failure(ErrorCode code) {
  switch (code) {
    case ErrorCode::FiniteEscape:
    case ErrorCode::NotDominantSpec:
    case ErrorCode::NoConvergence:
    case ErrorCode::NotObservable:
    case ErrorCode::ChainBroken:
    case ErrorCode::ZeroCost:
    case ErrorCode::NoBracket:
      return true;
    default:
      return false;
  }
}

}  // namespace peec
