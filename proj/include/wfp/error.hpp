#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wfp {

enum class ErrorKind {
  InvalidParams,
  DegenerateQ,
  DegenerateQ11,
  DegenerateDenominator,
  TrivialCase,
  ConstraintViolated,
  NegativeRatio,
  NotSymmetric,
  NonPositiveInput,
  DimensionMismatch,
  NotStationary,
  SingularCovariance,
  NotPSD,
  InsufficientData,
  NonPositiveDistance,
  ConfigError,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidParams: return "InvalidParams";
    case ErrorKind::DegenerateQ: return "DegenerateQ";
    case ErrorKind::DegenerateQ11: return "DegenerateQ11";
    case ErrorKind::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorKind::TrivialCase: return "TrivialCase";
    case ErrorKind::ConstraintViolated: return "ConstraintViolated";
    case ErrorKind::NegativeRatio: return "NegativeRatio";
    case ErrorKind::NotSymmetric: return "NotSymmetric";
    case ErrorKind::NonPositiveInput: return "NonPositiveInput";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NotStationary: return "NotStationary";
    case ErrorKind::SingularCovariance: return "SingularCovariance";
    case ErrorKind::NotPSD: return "NotPSD";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::NonPositiveDistance: return "NonPositiveDistance";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace wfp
