#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace tauspec {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unsupported family, bad domain, or other misconfiguration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Argument outside an operation's domain (empty series, basis mismatch...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Problem document failed validation. `path` is a JSON pointer into the
/// offending document ("" when the whole document is at fault).
class ValidationError : public Error {
 public:
  ValidationError(std::string path, const std::string& message)
      : Error(path.empty() ? message : path + ": " + message), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Tau matrix is numerically singular.
class SingularSystemError : public Error {
 public:
  SingularSystemError(const std::string& message, std::string block, int iteration = 0)
      : Error(message), block_(std::move(block)), iteration_(iteration) {}

  const std::string& block() const noexcept { return block_; }
  /// Newton iteration that produced the system (0 for a plain linear solve).
  int iteration() const noexcept { return iteration_; }

 private:
  std::string block_;
  int iteration_;
};

}  // namespace tauspec
