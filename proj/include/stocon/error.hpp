#pragma once

#include <stdexcept>
#include <string>

namespace stocon {

// Error taxonomy. CLI exit codes: config errors -> 1, numerical failures -> 2,
// certification failures -> 3.

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed arguments to an operation (wrong shape, NaN input, bad option).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// Linear solve refused: condition estimate at or beyond the configured limit.
class SingularMatrix : public Error {
 public:
  SingularMatrix(const std::string& what, double cond_estimate)
      : Error(what), cond(cond_estimate) {}
  double cond;
};

// Expression evaluation hit a domain violation (sqrt of a negative, x/0,
// non-integer power of a negative base, non-finite result).
class EvalDomainError : public Error {
 public:
  EvalDomainError(const std::string& what, std::size_t offset, std::string snippet)
      : Error(what), src_offset(offset), src_snippet(std::move(snippet)) {}
  std::size_t src_offset;
  std::string src_snippet;
};

// Expression syntax error with byte offset into the source string.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what), src_offset(offset) {}
  std::size_t src_offset;
};

// Configuration document rejected (unknown key, missing field, bad value).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace stocon
