#pragma once

#include <stdexcept>
#include <string>

namespace evrptw {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input. `line` is 1-based, or 0 when the problem is not tied to a
// particular line (e.g. a missing section).
class ParseError : public Error {
 public:
  ParseError(int line, const std::string& message)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + message
                       : message),
        line_(line),
        message_(message) {}

  int line() const { return line_; }
  const std::string& message() const { return message_; }

 private:
  int line_;
  std::string message_;
};

// A size guard of an exact (exponential) method was exceeded.
class GuardExceeded : public Error {
 public:
  GuardExceeded(std::string dimension, long long limit, long long actual)
      : Error("guard exceeded: " + dimension + " = " + std::to_string(actual) +
              " > " + std::to_string(limit)),
        dimension_(std::move(dimension)) {}

  const std::string& dimension() const { return dimension_; }

 private:
  std::string dimension_;
};

// A route or plan that is not well-formed (as opposed to merely infeasible).
class StructuralError : public Error {
 public:
  using Error::Error;
};

}  // namespace evrptw
