#pragma once

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

namespace subreg {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Reciprocal on the extended nonnegative half-line, with 1/+inf = 0 and 1/0 = +inf.
inline double reciprocal(double v) {
  if (v == kInf) return 0.0;
  if (v == 0.0) return kInf;
  return 1.0 / v;
}

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Syntax or resolution failure in an expression or a problem document.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t line, std::size_t column)
      : Error(format(msg, line, column)), message_(msg), line_(line), column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  const std::string& message() const { return message_; }

 private:
  static std::string format(const std::string& msg, std::size_t line, std::size_t column) {
    return std::to_string(line) + ":" + std::to_string(column) + ": " + msg;
  }
  std::string message_;
  std::size_t line_;
  std::size_t column_;
};

/// Runtime failure while evaluating an expression (unbound variable, domain error).
class EvalError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// The requested distance has no exact closed-form or convergent oracle.
class NoExactOracle : public Error {
 public:
  using Error::Error;
};

/// The anchor pair is not a point of the graph.
class AnchorError : public Error {
 public:
  AnchorError(const std::string& msg, double measured) : Error(msg), measured_(measured) {}
  double measured() const { return measured_; }

 private:
  double measured_;
};

}  // namespace subreg
