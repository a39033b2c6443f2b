#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ionctx {

// Base for every error raised by the library. Precondition violations on
// plain arguments use std::invalid_argument instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// Phonon truncation could not hold the dynamics (population reached the top
// Fock level, or the step-halving check did not converge).
class TruncationError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace ionctx
