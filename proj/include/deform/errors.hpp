#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace deform {

/// Base class of every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. Carries the 1-based line number (0 when unknown).
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Input parsed but violates a structural invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed to converge or hit a singular system.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double residual = 0.0)
      : Error(what), residual_(residual) {}

  double residual() const { return residual_; }

 private:
  double residual_;
};

}  // namespace deform
