#pragma once

#include <stdexcept>
#include <string>

namespace inflection {

/// Input, spec, config, or schema problems. The CLI maps these to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Failures of a numerical routine on otherwise valid input. Exit code 3.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidSpecError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// |S'(0)| >= c or |S'(1)| <= c: no interior inflection point exists.
class BoundaryViolationError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InvalidConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : ValidationError(what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class SchemaMismatchError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InvariantViolationError : public ValidationError {
 public:
  InvariantViolationError(const std::string& what, std::size_t row)
      : ValidationError(what), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class NonConvergenceError : public NumericError {
 public:
  NonConvergenceError(const std::string& what, int iterations)
      : NumericError(what), iterations_(iterations) {}
  int iterations() const noexcept { return iterations_; }

 private:
  int iterations_;
};

/// A design column is (numerically) a combination of the ones before it.
class RankDeficiencyError : public NumericError {
 public:
  RankDeficiencyError(const std::string& what, std::string column)
      : NumericError(what), column_(std::move(column)) {}
  const std::string& column() const noexcept { return column_; }

 private:
  std::string column_;
};

class SingleClusterError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Logistic likelihood diverges (perfect or quasi-complete separation).
class SeparationError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// No treated or no control units remain on common support.
class EmptySideError : public NumericError {
 public:
  using NumericError::NumericError;
};

class MissingPeriodsError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class NonBinaryModeratorError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Wraps an error raised inside one pipeline stage, keeping the original kind
/// visible through `numeric()`.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what, bool numeric)
      : std::runtime_error(stage + ": " + what),
        stage_(std::move(stage)),
        numeric_(numeric) {}
  const std::string& stage() const noexcept { return stage_; }
  bool numeric() const noexcept { return numeric_; }

 private:
  std::string stage_;
  bool numeric_;
};

}  // namespace inflection
