#pragma once

#include <stdexcept>
#include <string>

namespace hwbench {

// Argument outside the mathematical domain of a relation (ln of a
// non-positive activity, non-positive conductivity, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Result not representable (exponent overflow in the Nernst mapping).
class RangeError : public std::range_error {
 public:
  using std::range_error::range_error;
};

// Inconsistent scan plan or sweep request.
class PlanError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Configuration violation; `field()` is the dotted path of the offending key.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Malformed CSV input; `line()` is 1-based.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Too few samples or points for the requested computation.
class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A wait (temperature stabilization, steady state) exceeded its budget.
class TimeoutError : public std::runtime_error {
 public:
  TimeoutError(const std::string& what, double elapsed_s)
      : std::runtime_error(what), elapsed_s_(elapsed_s) {}
  double elapsed_s() const noexcept { return elapsed_s_; }

 private:
  double elapsed_s_;
};

}  // namespace hwbench
