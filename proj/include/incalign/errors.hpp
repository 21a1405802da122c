#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace incalign {

// Malformed or inconsistent input: files, ids, labels, markings.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An internal contract was broken, e.g. an emitted alignment failed verification.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Raised by the embedded LP/ILP solver (depth exhaustion, unboundedness).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Explicit state-space exploration exceeded its configured bound.
class StateSpaceLimit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DisabledTransition : public DataError {
 public:
  DisabledTransition(std::size_t step, std::string transition, std::string place)
      : DataError("transition '" + transition + "' disabled at step " + std::to_string(step) +
                  ": place '" + place + "' is unmarked"),
        step_(step),
        transition_(std::move(transition)),
        place_(std::move(place)) {}

  std::size_t step() const noexcept { return step_; }
  const std::string& transition() const noexcept { return transition_; }
  const std::string& place() const noexcept { return place_; }

 private:
  std::size_t step_;
  std::string transition_;
  std::string place_;
};

}  // namespace incalign
