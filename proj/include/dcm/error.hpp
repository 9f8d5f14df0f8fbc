#pragma once

#include <stdexcept>
#include <string>

namespace dcm {

enum class ErrorKind {
  InvalidParameter,
  InvalidInput,
  Truncation,
  InconsistentInput,
  Coverage,
  DegenerateNormalization,
  DegenerateStationaryPoint,
  DegenerateField,
  IllPosed,
  BracketFailure,
  InfeasibleParameters,
  EnergyTooSmall,
  InvalidCovariance,
  Config,
  Io,
};

const char* to_string(ErrorKind kind);

/// Library error. Every failure path throws this (or a subclass carrying
/// diagnostics) so callers can switch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidParameter: return "invalid-parameter";
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::Truncation: return "truncation";
    case ErrorKind::InconsistentInput: return "inconsistent-input";
    case ErrorKind::Coverage: return "coverage";
    case ErrorKind::DegenerateNormalization: return "degenerate-normalization";
    case ErrorKind::DegenerateStationaryPoint: return "degenerate-stationary-point";
    case ErrorKind::DegenerateField: return "degenerate-field";
    case ErrorKind::IllPosed: return "ill-posed";
    case ErrorKind::BracketFailure: return "bracket-failure";
    case ErrorKind::InfeasibleParameters: return "infeasible-parameters";
    case ErrorKind::EnergyTooSmall: return "energy-too-small";
    case ErrorKind::InvalidCovariance: return "invalid-covariance";
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

}  // namespace dcm
