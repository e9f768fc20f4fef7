#pragma once

#include <stdexcept>
#include <string>

namespace ldw {

// Bad input, violated precondition or malformed configuration. The CLI maps
// this to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical procedure could not reach its accuracy target (quadrature,
// enumeration caps, degenerate statistics). The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ConfigError(message);
}

}  // namespace ldw
