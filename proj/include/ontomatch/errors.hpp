#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ontomatch {

// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input document (XML, JSON, TSV, cache file).
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t line, std::size_t column)
      : Error(msg + " (line " + std::to_string(line) + ", column " +
              std::to_string(column) + ")"),
        line_(line),
        column_(column) {}

  explicit ParseError(const std::string& msg) : Error(msg) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_ = 0;
  std::size_t column_ = 0;
};

// Unknown IRI or token.
class LookupError : public Error {
 public:
  using Error::Error;
};

// Invalid run configuration or precondition violation in a request.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A required input artifact does not exist.
class MissingArtifactError : public Error {
 public:
  using Error::Error;
};

// Endpoint unreachable or non-2xx after exhausting retries.
class TransportError : public Error {
 public:
  using Error::Error;
};

// Endpoint reachable but the response violates the wire protocol.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// Verdict cache file contains an unreadable record.
class CacheError : public Error {
 public:
  using Error::Error;
};

// Input data cannot satisfy the request (insufficient pairs, empty
// ontology, candidate shortfall, coverage gaps).
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace ontomatch
