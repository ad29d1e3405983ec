#pragma once

#include <stdexcept>
#include <string>

namespace fracspde {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class NonConvergence : public Error {
 public:
  using Error::Error;
};

class GridTooShort : public Error {
 public:
  using Error::Error;
};

/// Carries the best value found and the achieved error estimate.
class QuadratureFailure : public Error {
 public:
  QuadratureFailure(const std::string& what, double partial = 0.0, double error_estimate = 0.0)
      : Error(what), partial_(partial), error_estimate_(error_estimate) {}
  double partial() const { return partial_; }
  double error_estimate() const { return error_estimate_; }

 private:
  double partial_;
  double error_estimate_;
};

class EvaluationAtSingularity : public Error {
 public:
  using Error::Error;
};

class SingularArgument : public Error {
 public:
  using Error::Error;
};

class FitFailure : public Error {
 public:
  using Error::Error;
};

class NotPositiveSemidefinite : public Error {
 public:
  using Error::Error;
};

class DivergenceDetected : public Error {
 public:
  using Error::Error;
};

class DegenerateBranch : public Error {
 public:
  using Error::Error;
};

class MissingEnvelope : public Error {
 public:
  using Error::Error;
};

class UnsupportedInput : public Error {
 public:
  using Error::Error;
};

class NumericalBlowup : public Error {
 public:
  NumericalBlowup(const std::string& what, int step) : Error(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

#define FRACSPDE_REQUIRE(cond, ExType, msg) \
  do {                                      \
    if (!(cond)) throw ExType(msg);         \
  } while (0)

}  // namespace fracspde
