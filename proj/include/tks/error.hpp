#pragma once

#include <stdexcept>
#include <string>

namespace tks {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input data or parameters violate a documented precondition (bad manifest
// record, unknown action name, out-of-range fraction). The CLI maps these to
// exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Reading or writing external data failed (missing frame, truncated file).
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace tks
