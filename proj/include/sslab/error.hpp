#pragma once

#include <stdexcept>
#include <string>

namespace sslab {

// Input lies outside a model's support or parameter domain.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A computation degenerated numerically: singular matrix, posterior with no
// mass, conditioning on a zero-density event.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed configuration or an operation requested for an unsupported
// combination of settings.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sslab
