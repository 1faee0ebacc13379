#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wml {

enum class ErrorCode {
  ParseError,
  ConstantPolynomial,
  DuplicatePolynomial,
  EmptyFamily,
  KOutOfRange,
  NuOutOfRange,
  DimensionMismatch,
  WeightTableTooShort,
  PhasePrecisionLoss,
  EmptySequence,
  BoxBudgetExceeded,
  DegenerateLadder,
  RhoExceedsB,
  InvalidArgument,
  ConfigInvalid,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (notably the CLI exit-code mapping) can dispatch without parsing
/// messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace wml
