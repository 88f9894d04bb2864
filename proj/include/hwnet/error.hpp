#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hwnet {

enum class ErrorCode {
  InvalidInput,
  NotATree,
  EmptyStar,
  NonpositiveRate,
  NotCriticallyLoaded,
  CRPViolation,
  SingularB1,
  InfeasibleAction,
  PolicyTopologyMismatch,
  NotApplicable,
  CertificationFailed,
  NBelowN0,
  BetaOutOfRange,
  TooManyPools,
  InsufficientTailMass,
  Inconsistent,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hwnet
