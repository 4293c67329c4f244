#pragma once

#include <stdexcept>
#include <string>

namespace fpd {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid generator, experiment, or CLI configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Problem instance does not admit the requested operation (bw > n_fs, n > |pool|).
class InstanceError : public Error {
 public:
  using Error::Error;
};

// Malformed file; the message names the offending field.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Well-formed input that breaks a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Operation not allowed in the current episode state.
class StateError : public Error {
 public:
  using Error::Error;
};

// Caller broke an API precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

// NaN or infinity reached a loss or gradient.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace fpd
