#pragma once

#include <stdexcept>
#include <string>

namespace glnem {

// Invalid configuration (unknown keys, incompatible family/link, bad grids).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data (asymmetry, duplicate dyads, support).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical failure: non-finite values, non-convergent series, divergences.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Rank-deficient input to a matrix construction.
class DegenerateInputError : public NumericError {
 public:
  using NumericError::NumericError;
};

// A value outside the support of a distribution.
class DomainError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace glnem
