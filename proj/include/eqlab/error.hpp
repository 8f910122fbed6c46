#pragma once

#include <stdexcept>
#include <string>

namespace eqlab {

// Base for every error the toolkit raises on bad input. The CLI maps these to
// exit code 1; anything else (including SolverError) is an internal failure.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class SchemaError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class EmptyDatasetError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Unknown group label in a model encoding or a policy lookup.
class EncodingError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InfeasibleError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// The allocation LP failed its own optimality certificate.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace eqlab
