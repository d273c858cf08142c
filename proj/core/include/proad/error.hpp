#pragma once

#include <stdexcept>
#include <string>

namespace proad {

// Base of every error thrown by the library. The CLI maps subclasses onto
// exit codes (usage 1, data 2, numerical 3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape or dimension disagreement between operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Out-of-range scalar parameter (dropout rate, hook scale, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// API misuse: non-scalar backward, empty iterator, bad flag combination.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Inconsistent model / run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Dataset generation or ingestion failure (missing mask, unreadable PNG).
class DataError : public Error {
 public:
  using Error::Error;
};

// Metric undefined for the given labels.
class MetricError : public Error {
 public:
  using Error::Error;
};

// Non-finite values surfaced during training.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace proad
