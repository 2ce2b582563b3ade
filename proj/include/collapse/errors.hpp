#pragma once

#include <stdexcept>
#include <string>

namespace collapse {

/// Input outside the mathematical domain of an operation (e.g. beta >= 1).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A grid or plotting range too small for the requested quantity.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Numerical control out of its allowed range (e.g. delta width epsilon).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The operation does not support the structure of the given state.
class UnsupportedStateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// State fails a precondition such as being normalized.
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace collapse

namespace collapse {

/// Malformed configuration text; line() is 1-based, 0 when not tied to a line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& what)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace collapse
