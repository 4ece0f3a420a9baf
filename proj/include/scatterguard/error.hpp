#pragma once

#include <stdexcept>
#include <string>

namespace scatterguard {

// Base class for every error the library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A documented precondition of an operation was violated by the caller.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// A scenario or parameter set is internally inconsistent.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// The received series carries no separable two-level backscatter signal.
class NoBackscatterDetected : public Error {
 public:
  using Error::Error;
};

// Malformed on-disk data. line() is 1-based; 0 when not line-specific.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  // Prefixes `context` (e.g. a path) and keeps the line number.
  ParseError(const std::string& context, const ParseError& inner)
      : Error(context + ": " + inner.what()), line_(inner.line_) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace scatterguard
