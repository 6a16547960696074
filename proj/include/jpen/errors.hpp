#pragma once

#include <stdexcept>
#include <string>

namespace jpen {

// Base of everything thrown by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Bad inputs: dimensions, parameter ranges, malformed files, impossible
// configurations.  The CLI maps these to exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Numerically doomed requests: non-PD factorizations, condition-number
// refusals, eigen-solver non-convergence, degenerate denominators.
// The CLI maps these to exit code 3.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ParameterError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// CSV / JSON ingestion problems; message carries line/column context.
class ParseError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// A zero or negative sample variance makes the correlation scale undefined.
class DegenerateVarianceError : public ValidationError {
 public:
  DegenerateVarianceError(const std::string& what, int index)
      : ValidationError(what), index_(index) {}
  int index() const { return index_; }

 private:
  int index_;
};

class NotPositiveDefiniteError : public NumericalError {
 public:
  explicit NotPositiveDefiniteError(const std::string& what, int pivot = -1)
      : NumericalError(what), pivot_(pivot) {}
  // Index of the failing Cholesky pivot, or -1 when the failure was
  // detected another way (e.g. a non-positive eigenvalue).
  int pivot() const { return pivot_; }

 private:
  int pivot_;
};

// Cross-validation found no admissible grid point.
class ExhaustedGridError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

}  // namespace jpen
