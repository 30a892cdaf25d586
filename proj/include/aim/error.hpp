#pragma once

#include <stdexcept>
#include <string>

namespace aim {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain (r <= 0, empty interval, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Parameter combination the requested branch cannot handle.
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values or failed numerical guarantees.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Recursion or bookkeeping invariant broken inside the engine.
class InternalError : public Error {
 public:
  using Error::Error;
};

class DegenerateStateError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// No root of the determinant near the tracked estimate.
class RootLostError : public NumericError {
 public:
  using NumericError::NumericError;
};

class BracketError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Grid-refinement disagreement in the finite-difference oracle.
class AccuracyError : public NumericError {
 public:
  AccuracyError(const std::string& what, double coarse, double fine)
      : NumericError(what), coarse_(coarse), fine_(fine) {}
  double coarse() const { return coarse_; }
  double fine() const { return fine_; }

 private:
  double coarse_;
  double fine_;
};

/// 1/lambda_n pole hit while evaluating rho.
class PoleError : public NumericError {
 public:
  PoleError(const std::string& what, double location)
      : NumericError(what), location_(location) {}
  double location() const { return location_; }

 private:
  double location_;
};

}  // namespace aim
