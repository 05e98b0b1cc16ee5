#pragma once

#include <stdexcept>
#include <string>

namespace inspire {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes or sizes that do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// An operation the object cannot perform, e.g. a gradient of a
// non-differentiable generator.
class CapabilityError : public Error {
 public:
  using Error::Error;
};

// Invalid user-supplied values (ballots, presets, configs).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Malformed bytes handed to a decoder.
class DecodeError : public Error {
 public:
  using Error::Error;
};

// NaN or inf showing up where a finite number is required.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Unknown ids (generators, sessions, presets).
class NotFoundError : public Error {
 public:
  using Error::Error;
};

}  // namespace inspire
