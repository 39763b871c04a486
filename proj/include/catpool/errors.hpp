#pragma once

#include <stdexcept>
#include <string>

namespace catpool {

// Argument outside the mathematical domain of an operation (p not in (0,1),
// d > l, mismatched dimensions, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// The pool has no expected layer loss at all, so premium shares are 0/0.
class DegeneratePoolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A statistic is undefined for the given data (zero variance, empty
// exceedance set, tied top order statistics).
class DegenerateDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input file does not carry the expected columns.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid experiment configuration. The message names the offending field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace catpool
