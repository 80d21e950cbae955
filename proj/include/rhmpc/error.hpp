#pragma once

#include <stdexcept>
#include <string>

namespace rhmpc {

enum class ErrorCode {
  DimensionMismatch,
  NumericalBreakdown,
  UnboundedVariable,
  StageInfeasible,
  EmptyStore,
  EmptyCuts,
  MasterInfeasible,
  InvalidParams,
  MapMismatch,
  SchemaError,
  ValueError,
  SizeCapExceeded,
  ConfigError,
  SolverFailure,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NumericalBreakdown: return "NumericalBreakdown";
    case ErrorCode::UnboundedVariable: return "UnboundedVariable";
    case ErrorCode::StageInfeasible: return "StageInfeasible";
    case ErrorCode::EmptyStore: return "EmptyStore";
    case ErrorCode::EmptyCuts: return "EmptyCuts";
    case ErrorCode::MasterInfeasible: return "MasterInfeasible";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::MapMismatch: return "MapMismatch";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::ValueError: return "ValueError";
    case ErrorCode::SizeCapExceeded: return "SizeCapExceeded";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::SolverFailure: return "SolverFailure";
  }
  return "Unknown";
}

/// Single exception type for the library; the code tells callers what failed.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rhmpc
