#pragma once

#include <stdexcept>
#include <string>

namespace anisokit {

enum class ErrorKind {
  invalid_input,
  non_convex,
  out_of_range,
  box_too_small,
  inconclusive,
  refused,
  non_convergence,
  io
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::invalid_input: return "invalid_input";
    case ErrorKind::non_convex: return "non_convex";
    case ErrorKind::out_of_range: return "out_of_range";
    case ErrorKind::box_too_small: return "box_too_small";
    case ErrorKind::inconclusive: return "inconclusive";
    case ErrorKind::refused: return "refused";
    case ErrorKind::non_convergence: return "non_convergence";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// Carries the attainable bracket so callers can clamp or widen the range.
class RangeError : public Error {
 public:
  RangeError(const std::string& what, double lo, double hi)
      : Error(ErrorKind::out_of_range, what), lo_(lo), hi_(hi) {}
  double lo() const { return lo_; }
  double hi() const { return hi_; }

 private:
  double lo_, hi_;
};

}  // namespace anisokit
