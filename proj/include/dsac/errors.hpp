#pragma once

#include <stdexcept>
#include <string>

namespace dsac {

// Bad configuration, dimension mismatch, unreadable checkpoint. CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// NaN/Inf reached a parameter update. CLI exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller broke a precondition (stale cache, empty batch, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace dsac
