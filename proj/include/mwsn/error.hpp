#pragma once

#include <stdexcept>
#include <string>

namespace mwsn {

enum class ErrorCode {
  InvalidArgument,
  ClockViolation,
  Config,
  Range,
  Io,
  Internal,
};

/// Every failure the core raises carries one of these codes; the C API maps
/// them one-to-one onto mwsn_status values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mwsn
