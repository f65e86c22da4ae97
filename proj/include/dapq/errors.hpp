#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dapq {

enum class ErrorKind {
  UnstableSystem,
  InvalidDelay,
  OutOfRange,
  NoClass1,
  NumericalInstability,
  RootBracketFailure,
  TruncationOverflow,
  NonConvergence,
  AccuracyNotMet,
  DegenerateMean,
  EmptyOverlap,
  Unsupported,
  NonMonotone,
};

std::string_view to_string(ErrorKind kind);

// Every failure in the library surfaces as this one exception type; callers
// branch on kind() rather than on a class hierarchy.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  // True for the kinds that indicate a numerical failure rather than bad input.
  bool is_numerical() const noexcept;

 private:
  ErrorKind kind_;
};

}  // namespace dapq
