#pragma once

#include <stdexcept>
#include <string>

namespace topoalign {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file; carries the 1-based line and column when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column = 0)
      : Error(format(what, line, column)), line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& what, std::size_t line, std::size_t column) {
    std::string msg = what + " at line " + std::to_string(line);
    if (column > 0) msg += ", column " + std::to_string(column);
    return msg;
  }

  std::size_t line_;
  std::size_t column_;
};

/// Caller passed arguments that violate a documented precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A computation would exceed its configured resource budget.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

}  // namespace topoalign
