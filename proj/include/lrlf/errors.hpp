#pragma once

#include <stdexcept>
#include <string>

namespace lrlf {

/// Invalid configuration or dimension mismatch detected before any numerics run.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine could not produce a finite, well-posed result.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lrlf
