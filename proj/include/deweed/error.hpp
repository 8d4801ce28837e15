#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace deweed {

// Base of every error raised by the library. The CLI maps subclasses onto
// process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A value or configuration violates a documented precondition.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Text input could not be parsed. Line and column are 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& what)
      : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

// A recipe cannot reach the requested lethality (zero dose rate).
class UnreachableTarget : public Error {
 public:
  using Error::Error;
};

// A metric is undefined for its input (empty tally, empty run list).
class UndefinedMetric : public Error {
 public:
  using Error::Error;
};

// An input exceeds the size the exhaustive planner accepts.
class GuardError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace deweed
