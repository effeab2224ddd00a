#pragma once

#include <stdexcept>
#include <string>

namespace hom {

// Invalid input, parameters, or file contents. The CLI maps these to exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A computation that could not produce a result (non-convergence, degenerate data).
// The CLI maps these to exit code 3.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyChannelError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class GridTooCoarseError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class UnsupportedSplitterError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DegenerateScanError : public NumericError {
 public:
  using NumericError::NumericError;
};

class NonConvergenceError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace hom
