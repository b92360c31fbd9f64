#pragma once

#include <stdexcept>
#include <string>

namespace polarix {

// Malformed or out-of-contract input (documents, node sets, parameters).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A requested computation that is refused by a size guard.
class SizeLimitError : public std::length_error {
 public:
  using std::length_error::length_error;
};

// Numerical breakdown during integration (non-finite state).
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, double time)
      : std::runtime_error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

}  // namespace polarix
