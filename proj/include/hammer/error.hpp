#pragma once

#include <stdexcept>
#include <string>

namespace hammer {

// Root of every error raised by the library. The CLI maps the subclasses
// onto exit codes (usage -> 2, I/O and format -> 3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller passed an argument outside an operation's contract.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Input bytes or records do not follow the expected layout.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Filesystem failure (missing file, unwritable path, short write).
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace hammer
