#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace portastat {

enum class ErrorKind {
  DegenerateLabels,
  EmptySample,
  EmptyConditional,
  DimensionMismatch,
  NoComparableBins,
  NonFiniteLoss,
  CalibrationFailure,
  StatisticFailure,
  ParseError,
  IoFailure,
  InvalidArgument,
};

std::string_view to_string(ErrorKind kind);

// Numerical failures map to a distinct CLI exit code from data problems.
inline bool is_numerical(ErrorKind kind) {
  return kind == ErrorKind::NonFiniteLoss || kind == ErrorKind::CalibrationFailure;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace portastat
