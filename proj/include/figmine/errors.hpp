#pragma once

#include <stdexcept>
#include <string>

namespace figmine {

// Error kinds map 1:1 onto CLI exit codes.
enum class ErrorKind {
  usage = 1,       // bad invocation, empty input, misaligned keys
  io = 2,          // unreadable/unwritable files
  backend = 3,     // vision backend exhausted / unreachable
  validation = 4,  // malformed data, contract violations
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message)
      : std::runtime_error(std::move(message)), kind_(kind) {}

  ErrorKind kind() const { return kind_; }
  int exit_code() const { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

struct UsageError : Error {
  explicit UsageError(std::string message) : Error(ErrorKind::usage, std::move(message)) {}
};

struct IoError : Error {
  explicit IoError(std::string message) : Error(ErrorKind::io, std::move(message)) {}
};

struct BackendError : Error {
  explicit BackendError(std::string message) : Error(ErrorKind::backend, std::move(message)) {}
};

struct ValidationError : Error {
  explicit ValidationError(std::string message) : Error(ErrorKind::validation, std::move(message)) {}
};

}  // namespace figmine
