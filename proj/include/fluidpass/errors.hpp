#pragma once

#include <stdexcept>
#include <string>

namespace fluidpass {

enum class ErrorCode {
  // model
  NonGenerator,
  DimensionMismatch,
  NonPositiveBuffer,
  Reducible,
  NoDrainingState,
  // mesh
  DegenerateGrid,
  AllRatesZero,
  // spatial / time stepping
  WrongGridKind,
  NonFinite,
  SingularSystem,
  TooLarge,
  // transform path
  ZeroRate,
  EigFailure,
  IllConditioned,
  NonPositiveTime,
  // monte carlo
  EmptySample,
  TooCensored,
  // cli
  ConfigError,
  UnknownSuite,
  IoError,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline const char* error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonGenerator: return "NonGenerator";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonPositiveBuffer: return "NonPositiveBuffer";
    case ErrorCode::Reducible: return "Reducible";
    case ErrorCode::NoDrainingState: return "NoDrainingState";
    case ErrorCode::DegenerateGrid: return "DegenerateGrid";
    case ErrorCode::AllRatesZero: return "AllRatesZero";
    case ErrorCode::WrongGridKind: return "WrongGridKind";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::ZeroRate: return "ZeroRate";
    case ErrorCode::EigFailure: return "EigFailure";
    case ErrorCode::IllConditioned: return "IllConditioned";
    case ErrorCode::NonPositiveTime: return "NonPositiveTime";
    case ErrorCode::EmptySample: return "EmptySample";
    case ErrorCode::TooCensored: return "TooCensored";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::UnknownSuite: return "UnknownSuite";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

// Process exit codes, one per error family.
inline int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::UnknownSuite: return 2;
    case ErrorCode::NonGenerator:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::NonPositiveBuffer:
    case ErrorCode::Reducible:
    case ErrorCode::NoDrainingState: return 3;
    case ErrorCode::DegenerateGrid:
    case ErrorCode::AllRatesZero:
    case ErrorCode::WrongGridKind: return 4;
    case ErrorCode::NonFinite:
    case ErrorCode::SingularSystem:
    case ErrorCode::TooLarge: return 5;
    case ErrorCode::ZeroRate:
    case ErrorCode::EigFailure:
    case ErrorCode::IllConditioned:
    case ErrorCode::NonPositiveTime: return 6;
    case ErrorCode::EmptySample:
    case ErrorCode::TooCensored: return 7;
    case ErrorCode::IoError: return 8;
  }
  return 1;
}

}  // namespace fluidpass
