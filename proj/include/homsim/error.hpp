#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace homsim {

enum class ErrorKind {
  NonConvergence,
  NonFiniteSample,
  DimensionTooLarge,
  NonPhysical,
  InvalidArgument,
  ModeMismatch,
  OutOfRange,
  InvalidOverlap,
  NumericalFailure,
  Config,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the library; the kind drives CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// True for failures of the numerics rather than of the inputs.
  bool is_numerical() const noexcept {
    return kind_ == ErrorKind::NonConvergence ||
           kind_ == ErrorKind::NonFiniteSample ||
           kind_ == ErrorKind::NumericalFailure;
  }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace homsim
