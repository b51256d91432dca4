#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace momentid {

enum class ErrorCode {
  InvalidArgument,
  OrderOverflow,
  NoMomentDifference,
  SharedComponentNotFound,
  ZeroDenominator,
  NoOrderFound,
  RootsNotReal,
  AlphaUnchanged,
  NonIdentifiable,
  RankDeficient,
  ZeroVariance,
  ParseError,
  IoError,
};

std::string_view to_string(ErrorCode code);

// Every recoverable failure in the library is reported through this type so
// that callers (CLI, harness, bindings) can surface a stable machine-readable
// code next to the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace momentid
