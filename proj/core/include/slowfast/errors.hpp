#pragma once

#include <stdexcept>

namespace slowfast {

// An integrator or estimator produced a non-finite value.
class NumericalBlowupError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An operation requires a model ingredient that is absent (invariant density
// for the Metropolis correction, analytic averaged drift for exact
// initialization) or was asked to run in an unsupported mode.
class UnsupportedModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An experiment configuration is inconsistent or incomplete.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Result files could not be written or read.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace slowfast
