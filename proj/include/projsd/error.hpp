#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace projsd {

enum class ErrorCode {
  DimensionMismatch,
  InvalidArgument,
  NonConvergence,
  DegenerateSet,
  EtaTooLarge,
  LinearCaseUnbounded,
  NonpositiveU,
  ZeroGradient,
  TransitionInvalid,
  NoSuchLevel,
  TauOutOfRange,
  LambdaTooSmall,
  SchemaError,
  Io,
};

std::string_view toString(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map them to exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(toString(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace projsd
