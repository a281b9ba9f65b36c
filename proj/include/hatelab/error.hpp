#pragma once

#include <stdexcept>
#include <string>

namespace hatelab {

// Base for every error raised by the toolkit. The CLI maps subclasses onto
// exit statuses (see cli.hpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input data: bad URL, bad JSON line, unknown label, ...
class DataError : public Error {
 public:
  using Error::Error;
};

class UrlParseError : public DataError {
 public:
  using DataError::DataError;
};

class LabelMappingError : public DataError {
 public:
  using DataError::DataError;
};

class ExtractionError : public DataError {
 public:
  using DataError::DataError;
};

// Invalid or unreadable configuration, bad arguments to an operation.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace hatelab
