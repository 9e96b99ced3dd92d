#pragma once

#include <stdexcept>
#include <string>

namespace geoflow {

enum class ErrorKind {
  invalid_argument,
  dimension_mismatch,
  size_limit,
  parse_error,
  duplicate_point,
  corrupted_state,
  construction_failed,
  numerical_failure,
};

const char* to_string(ErrorKind kind) noexcept;

/// Base exception for every failure raised by the library. The kind lets
/// front ends map failures onto exit codes without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised by file loaders; carries the 1-based line and column of the fault.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, int line, int column)
      : Error(ErrorKind::parse_error,
              "line " + std::to_string(line) + ", column " +
                  std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace geoflow
