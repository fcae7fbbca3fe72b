#pragma once

#include <stdexcept>
#include <string>

namespace stochlq {

/// Base of every error raised by the library. Each subclass names the failure
/// class the command-line front end maps onto an exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Problem ingestion.
class ParseError : public Error {
 public:
  using Error::Error;
};
class DimensionError : public Error {
 public:
  using Error::Error;
};
class InvariantError : public Error {
 public:
  using Error::Error;
};

// Numerical failures.
class NumericalError : public Error {
 public:
  using Error::Error;
};
class ConvergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};
class SingularError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};
class RiccatiError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Time-domain evaluation and control synthesis.
class HorizonError : public Error {
 public:
  using Error::Error;
};
class IntegratorError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};
class InputError : public Error {
 public:
  using Error::Error;
};
class TailError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// A pipeline stage refused to run because an upstream verdict forbids it.
class GateError : public Error {
 public:
  using Error::Error;
};

// Monte Carlo.
class ConfigError : public Error {
 public:
  using Error::Error;
};
class OverflowError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace stochlq
