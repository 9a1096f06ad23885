#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace safecmaes {

enum class ErrorCode {
  ContractViolation,
  DomainError,
  SingularCovariance,
  InvalidObjective,
  DegenerateGram,
  InvalidStart,
  EmptySafeRegion,
  MissingSeeds,
  SeedSamplingExhausted,
  AvoidanceExhausted,
  UnknownName,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library; the code tells callers which
/// failure path fired (e.g. the harness maps AvoidanceExhausted to a trial
/// termination reason rather than an abort).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, ErrorCode code, const char* what) {
  if (!condition) fail(code, what);
}

}  // namespace safecmaes
