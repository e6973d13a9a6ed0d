#pragma once

#include <stdexcept>
#include <string>

namespace fractalscape {

enum class ErrorKind {
  invalid_argument,
  non_finite_state,
  degenerate_density,
  degenerate_variance,
  insufficient_points,
  layout_mismatch,
};

const char* to_string(ErrorKind kind);

/// Every failure raised by the library carries a kind so callers (the CLI in
/// particular) can map it to an exit code without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// Numerical failures (as opposed to bad input).
  bool numerical() const noexcept {
    return kind_ == ErrorKind::non_finite_state ||
           kind_ == ErrorKind::degenerate_density ||
           kind_ == ErrorKind::degenerate_variance;
  }

 private:
  ErrorKind kind_;
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "InvalidArgument";
    case ErrorKind::non_finite_state: return "NonFiniteState";
    case ErrorKind::degenerate_density: return "DegenerateDensity";
    case ErrorKind::degenerate_variance: return "DegenerateVariance";
    case ErrorKind::insufficient_points: return "InsufficientPoints";
    case ErrorKind::layout_mismatch: return "LayoutMismatch";
  }
  return "Unknown";
}

inline void require(bool condition, const std::string& message) {
  if (!condition) throw Error(ErrorKind::invalid_argument, message);
}

// Hot-path overload: the message string is only built on failure.
inline void require(bool condition, const char* message) {
  if (!condition) throw Error(ErrorKind::invalid_argument, message);
}

}  // namespace fractalscape
