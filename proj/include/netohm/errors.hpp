#pragma once

#include <stdexcept>
#include <string>

namespace netohm {

// Invalid construction, out-of-range parameter or mismatched argument shape.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A linear operator that must be invertible is numerically singular.
class SingularOperatorError : public std::runtime_error {
 public:
  SingularOperatorError(const std::string& what, double smallest_singular_value)
      : std::runtime_error(what), smallest_singular_value_(smallest_singular_value) {}

  double smallest_singular_value() const { return smallest_singular_value_; }

 private:
  double smallest_singular_value_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace netohm
