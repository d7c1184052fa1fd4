#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gfse {

/// Bad arguments to a library call (empty pool, epsilon <= 0, ...).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A policy or reward asked for a feature the observation schema lacks,
/// or an observation value is outside the feature's domain.
class SchemaError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

/// Malformed input text. `line` is 1-based; 0 when not applicable.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Input parsed but violates a semantic constraint (non-monotone days,
/// missing config field, ...).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Validation failure tied to one configuration field, e.g. "method.budgets".
class ConfigError : public ValidationError {
 public:
  ConfigError(std::string field, const std::string& what)
      : ValidationError(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Numerical failure, e.g. a kernel matrix that stays indefinite after jitter.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gfse
