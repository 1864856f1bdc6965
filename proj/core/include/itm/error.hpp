#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace itm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad configuration, bad flags, or input that violates a documented precondition.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Malformed line in an annotation file. line() is 1-based.
class ParseError : public ValidationError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : ValidationError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Raised when a sampler produces a non-finite quantity.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace itm
