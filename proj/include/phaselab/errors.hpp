#pragma once

#include <charconv>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace phaselab {

/// Short decimal form of a double for messages (4 significant digits).
inline std::string num(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 4);
  return ec == std::errc{} ? std::string(buf, end) : std::string("?");
}

/// A caller violated a documented precondition (bad grid, invalid packet, ...).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A simulation left the regime in which its results mean anything.
///
/// Carries the step index and simulation time at which the violation was
/// detected so that reports can point at it.
class PhysicsViolation : public std::runtime_error {
 public:
  PhysicsViolation(const std::string& what, std::size_t step, double time)
      : std::runtime_error(what + " (step " + std::to_string(step) + ", t = " +
                           num(time) + ")"),
        step_(step),
        time_(time) {}

  std::size_t step() const noexcept { return step_; }
  double time() const noexcept { return time_; }

 private:
  std::size_t step_;
  double time_;
};

/// Phase extraction failed (amplitude too small, aliasing, ...).
class AnalysisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace phaselab
