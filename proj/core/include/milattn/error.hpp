#pragma once

#include <stdexcept>
#include <string>

namespace milattn {

// Invalid hyperparameters, mismatched shapes or bad manifest contents.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent data (bags, pools, persisted records).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Failure while parsing an external file. Carries the location when known.
class IngestError : public DataError {
 public:
  using DataError::DataError;
};

// A metric was requested on input for which it is not defined.
class MetricError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Training produced a non-finite loss or gradient.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Broken internal contract, e.g. a cache that does not belong to the network.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace milattn
