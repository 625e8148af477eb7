#pragma once

#include <stdexcept>
#include <string>

namespace rprl {

// Structural mismatch between tensors and the layers that consume them.
class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// API misuse: calling an operation in a state where it is not allowed.
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Invalid configuration values or missing configuration. The CLI maps this
// to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed, truncated, or version-mismatched files.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// NaN/Inf detected where finite values are required.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rprl
