#pragma once

#include <stdexcept>
#include <string>

namespace sigdiag {

// Error taxonomy shared by all modules. The CLI maps these to exit codes:
// config -> 1 (usage), schema/io/insufficient-data -> 2 (data),
// everything else -> 3 (runtime).

// Malformed or inconsistent values: dimension mismatches, bad enum strings,
// out-of-range fields.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A size limit would be exceeded (e.g. signature term count cap).
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Not enough samples to perform the requested operation.
class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operation called on an object in the wrong lifecycle state
// (e.g. compressing with an untrained stack, backward with a stale cache).
class StateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File system / parsing failures; message carries file and position.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid run configuration (flag combinations, fold counts, ...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sigdiag
