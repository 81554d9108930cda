#pragma once

#include <stdexcept>
#include <string>

namespace fraktal {

// Base class for all errors raised by the library. Every failure mode is a
// typed exception; nothing is reported through sentinel values.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid user input (expressions, configs, parameter ranges).
struct ConfigError : Error {
  using Error::Error;
};

// Expression syntax error; `offset` is the byte offset into the source text.
struct ParseError : ConfigError {
  ParseError(const std::string& msg, std::size_t offset_)
      : ConfigError(msg), offset(offset_) {}
  std::size_t offset;
};

// Expression evaluation left its domain (division by zero, sqrt of a
// negative, ...). Carries the offending subexpression and the point.
struct EvalDomainError : Error {
  EvalDomainError(const std::string& msg, std::string subexpr_, double x_, double y_)
      : Error(msg), subexpr(std::move(subexpr_)), x(x_), y(y_) {}
  std::string subexpr;
  double x, y;
};

struct GeometryError : Error {
  using Error::Error;
};

struct MeshError : Error {
  using Error::Error;
};

// Numerical failure inside the energy core (overflow guard, non-finite sums).
struct EnergyError : Error {
  using Error::Error;
};

struct SolverError : Error {
  using Error::Error;
};

// Solver ran out of iterations; carries the last residual seen.
struct NonConvergenceError : SolverError {
  NonConvergenceError(const std::string& msg, double residual_)
      : SolverError(msg), residual(residual_) {}
  double residual;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace fraktal
