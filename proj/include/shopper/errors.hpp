#pragma once

#include <stdexcept>
#include <string>

namespace shopper {

/// Base class for every error raised by the pipeline.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad index, bad PGM, bad JSON, bad config value.
class FormatError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Caller violated an operation precondition.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Illegal lifecycle transition (duplicate open, closing a closed interaction).
class StateError : public Error {
 public:
  using Error::Error;
};

}  // namespace shopper
