#pragma once

#include <stdexcept>
#include <string>

namespace twofold {

enum class ErrorCode {
  InvalidArgument,
  InvalidParams,
  DegenerateSliding,
  NotSlidingRegion,
  LeavesCrossingRegime,
  DomainError,
  MaxStepsExceeded,
  NonFiniteState,
  NoConvergence,
  NoCrossingBefore,
  SeedEscaped,
  DepthTooLarge,
};

const char* to_string(ErrorCode code) noexcept;

// All recoverable failures in the library are reported with this type.  The C
// API maps `code()` one-to-one onto tf_status values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace twofold
