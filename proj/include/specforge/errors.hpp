#pragma once

#include <stdexcept>
#include <string>

namespace specforge {

/// Base of every error raised by the library. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed file contents (bad magic, truncated payload, header/payload mismatch).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A value or combination of arguments violates a documented invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Filesystem failure: unreadable or unwritable path.
class IoError : public Error {
 public:
  using Error::Error;
};

/// External codec command failed.
class CodecError : public Error {
 public:
  CodecError(const std::string& what, int exit_status)
      : Error(what), exit_status_(exit_status) {}
  int exit_status() const noexcept { return exit_status_; }

 private:
  int exit_status_;
};

}  // namespace specforge
