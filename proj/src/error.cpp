#include "hwnet/error.hpp"

namespace hwnet {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::NotATree: return "NotATree";
    case ErrorCode::EmptyStar: return "EmptyStar";
    case ErrorCode::NonpositiveRate: return "NonpositiveRate";
    case ErrorCode::NotCriticallyLoaded: return "NotCriticallyLoaded";
    case ErrorCode::CRPViolation: return "CRPViolation";
    case ErrorCode::SingularB1: return "SingularB1";
    case ErrorCode::InfeasibleAction: return "InfeasibleAction";
    case ErrorCode::PolicyTopologyMismatch: return "PolicyTopologyMismatch";
    case ErrorCode::NotApplicable: return "NotApplicable";
    case ErrorCode::CertificationFailed: return "CertificationFailed";
    case ErrorCode::NBelowN0: return "NBelowN0";
    case ErrorCode::BetaOutOfRange: return "BetaOutOfRange";
    case ErrorCode::TooManyPools: return "TooManyPools";
    case ErrorCode::InsufficientTailMass: return "InsufficientTailMass";
    case ErrorCode::Inconsistent: return "Inconsistent";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

}  // namespace hwnet
