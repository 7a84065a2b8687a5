#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace chainforge {

/// Invalid argument to an operation (out-of-range degree, bad link parameters, ...).
class ParameterError : public std::invalid_argument {
 public:
  explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

/// Malformed graph/link/construction text. Carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// An enumeration or search exceeded its configured budget.
class BudgetExceeded : public std::runtime_error {
 public:
  explicit BudgetExceeded(const std::string& what) : std::runtime_error(what) {}
};

/// A randomized construction could not satisfy its preconditions.
class ConstructionInfeasible : public std::runtime_error {
 public:
  explicit ConstructionInfeasible(const std::string& what) : std::runtime_error(what) {}
};

/// CSV or config content does not match the expected schema.
class SchemaError : public std::runtime_error {
 public:
  explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
};

/// A broken internal invariant (e.g. a property-graph edge whose chain cannot be realized).
class InvariantViolation : public std::logic_error {
 public:
  explicit InvariantViolation(const std::string& what) : std::logic_error(what) {}
};

}  // namespace chainforge
