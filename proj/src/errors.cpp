#include "safecmaes/errors.hpp"

namespace safecmaes {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ContractViolation: return "ContractViolation";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::SingularCovariance: return "SingularCovariance";
    case ErrorCode::InvalidObjective: return "InvalidObjective";
    case ErrorCode::DegenerateGram: return "DegenerateGram";
    case ErrorCode::InvalidStart: return "InvalidStart";
    case ErrorCode::EmptySafeRegion: return "EmptySafeRegion";
    case ErrorCode::MissingSeeds: return "MissingSeeds";
    case ErrorCode::SeedSamplingExhausted: return "SeedSamplingExhausted";
    case ErrorCode::AvoidanceExhausted: return "AvoidanceExhausted";
    case ErrorCode::UnknownName: return "UnknownName";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace safecmaes
