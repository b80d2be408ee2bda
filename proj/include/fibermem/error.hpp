#pragma once

#include <stdexcept>
#include <string>

namespace fibermem {

// Argument outside the mathematical domain of an operation (non-positive
// wavelength, probability outside (0,1], zero efficiency, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Query outside tabulated data; no extrapolation is ever performed.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Requested physical state cannot exist, e.g. a lifetime longer than the
// fiber-loss bound allows.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration. The message names the offending field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InsufficientDataError : public FitError {
 public:
  using FitError::FitError;
};

class NonDecayingError : public FitError {
 public:
  using FitError::FitError;
};

// Ratio against a zero reference count.
class DivisionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fibermem
