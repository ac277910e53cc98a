#pragma once

#include <stdexcept>
#include <string>

namespace zoneseq {

// Base of all library errors. The CLI maps each subclass to an exit code.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data (exit code 1).
class ValidationError : public Error {
public:
  using Error::Error;
};

// Unknown stop / zone / route id.
class LookupError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

// File system or subprocess failure (exit code 2).
class IoError : public Error {
public:
  using Error::Error;
};

// Bad configuration values (exit code 3).
class ConfigError : public Error {
public:
  using Error::Error;
};

} // namespace zoneseq
