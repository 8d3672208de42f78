#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qasched {

enum class ErrorKind {
  validation,
  parse,
  dimension,
  capacity,
  range,
  convergence,
  objective,
  config,
  degenerate,
  io,
};

inline const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::validation: return "validation";
    case ErrorKind::parse: return "parse";
    case ErrorKind::dimension: return "dimension";
    case ErrorKind::capacity: return "capacity";
    case ErrorKind::range: return "range";
    case ErrorKind::convergence: return "convergence";
    case ErrorKind::objective: return "objective";
    case ErrorKind::config: return "config";
    case ErrorKind::degenerate: return "degenerate";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

/// Base of every error thrown by the library. The kind decides the CLI exit
/// code (see exit_code()).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(ErrorKind::parse,
              "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double best_residual)
      : Error(ErrorKind::convergence, what), best_residual_(best_residual) {}

  double best_residual() const noexcept { return best_residual_; }

 private:
  double best_residual_;
};

class ObjectiveError : public Error {
 public:
  ObjectiveError(const std::string& what, std::vector<double> point)
      : Error(ErrorKind::objective, what), point_(std::move(point)) {}

  const std::vector<double>& point() const noexcept { return point_; }

 private:
  std::vector<double> point_;
};

/// 0 success, 1 validation/parse, 2 range/capacity, 3 convergence.
inline int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::range:
    case ErrorKind::capacity:
      return 2;
    case ErrorKind::convergence:
      return 3;
    default:
      return 1;
  }
}

}  // namespace qasched
