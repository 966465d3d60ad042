#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mixedopt {

enum class ErrorKind {
  InvalidCutoff,
  InvalidComposition,
  InvalidSpace,
  InvalidInput,
  DimensionMismatch,
  NumericError,
  NotPositiveSemidefinite,
  OutsideStationaryDomain,
  SingularDisplacement,
  CothSingularity,
  StiffFailure,
  IntegrationError,
  UnphysicalBath,
  CutoffInsufficient,
  ZeroProbabilityOutcome,
  UnknownSuite,
};

/// Stable machine-readable name, used in CLI error output.
inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidCutoff: return "invalid-cutoff";
    case ErrorKind::InvalidComposition: return "invalid-composition";
    case ErrorKind::InvalidSpace: return "invalid-space";
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::DimensionMismatch: return "dimension-mismatch";
    case ErrorKind::NumericError: return "numeric-error";
    case ErrorKind::NotPositiveSemidefinite: return "not-positive-semidefinite";
    case ErrorKind::OutsideStationaryDomain: return "outside-stationary-domain";
    case ErrorKind::SingularDisplacement: return "singular-displacement";
    case ErrorKind::CothSingularity: return "coth-singularity";
    case ErrorKind::StiffFailure: return "stiff-failure";
    case ErrorKind::IntegrationError: return "integration-error";
    case ErrorKind::UnphysicalBath: return "unphysical-bath";
    case ErrorKind::CutoffInsufficient: return "cutoff-insufficient";
    case ErrorKind::ZeroProbabilityOutcome: return "zero-probability-outcome";
    case ErrorKind::UnknownSuite: return "unknown-suite";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Integration failure that remembers how far the solver got.
class IntegrationFailure : public Error {
 public:
  IntegrationFailure(ErrorKind kind, const std::string& what, double last_good_time)
      : Error(kind, what + " (last good t=" + std::to_string(last_good_time) + ")"),
        last_good_time_(last_good_time) {}

  double last_good_time() const noexcept { return last_good_time_; }

 private:
  double last_good_time_;
};

}  // namespace mixedopt
