#pragma once

#include <stdexcept>
#include <string>

namespace timberline {

/// Malformed or inconsistent input data (bad CSV cell, missing table, unknown evalid).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A foreign key or record invariant that estimation depends on does not hold.
class IntegrityError : public DataError {
 public:
  using DataError::DataError;
};

/// Invalid caller-supplied option (bad lambda, conflicting clip options).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Syntax error in a domain predicate. `position()` is a 0-based byte offset.
class ParseError : public UsageError {
 public:
  ParseError(const std::string& message, std::size_t position)
      : UsageError(message), position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// An identifier or operand that cannot be resolved against the table schema.
class BindError : public UsageError {
 public:
  using UsageError::UsageError;
};

class NetworkError : public std::runtime_error {
 public:
  NetworkError(const std::string& message, int status, bool retriable)
      : std::runtime_error(message), status_(status), retriable_(retriable) {}
  /// HTTP status, or 0 when no response was received.
  int status() const noexcept { return status_; }
  bool retriable() const noexcept { return retriable_; }

 private:
  int status_;
  bool retriable_;
};

}  // namespace timberline
