#pragma once

#include <stdexcept>
#include <string>

namespace roaddbn {

/// Dimension mismatch or an operation that would break a structural invariant.
class StructuralError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A request that exceeds a hard size limit (enumeration bound, neuron cap).
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class FileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed text input. `line()` is 1-based; 0 when unknown.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace roaddbn
