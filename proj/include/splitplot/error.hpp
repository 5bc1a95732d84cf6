#pragma once

#include <stdexcept>
#include <string>

namespace splitplot {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input that violates a documented precondition: bad shapes, non-finite
/// values, invalid designs or schema violations. The CLI maps these to exit
/// code 2.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// An assignment space (or other enumeration) larger than the configured cap.
class CapExceeded : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

/// A numerical failure the library could not recover from.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace splitplot
