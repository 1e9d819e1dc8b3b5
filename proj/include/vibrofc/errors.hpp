#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace vibrofc {

/// Input outside the mathematical domain of an operation (bad index, bad argument range,
/// dimension mismatch, non-invertible matrix handed to a constructor).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Tomogram query with |nu| at or below the configured threshold.
class SingularParameterError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// sigma + Lambda^T sigma~ Lambda (or another Gaussian precision) is not invertible.
class DegenerateConfigurationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Quadrature / integration dimension beyond the supported cost guard.
class UnsupportedDimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure did not reach its tolerance. Carries the best estimate and
/// whatever diagnostic sequence the procedure produced.
class AccuracyError : public std::runtime_error {
 public:
  AccuracyError(const std::string& what, double estimate, std::vector<double> diagnostics = {})
      : std::runtime_error(what), estimate_(estimate), diagnostics_(std::move(diagnostics)) {}

  double estimate() const noexcept { return estimate_; }
  const std::vector<double>& diagnostics() const noexcept { return diagnostics_; }

 private:
  double estimate_;
  std::vector<double> diagnostics_;
};

/// Malformed molecule specification document.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line, int column)
      : std::runtime_error(what), line_(line), column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

/// A well-formed specification that violates a field invariant.
class InvariantError : public std::runtime_error {
 public:
  InvariantError(const std::string& field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(field) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Requested FC engine is not applicable to the given configuration.
class MethodMismatchError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace vibrofc
