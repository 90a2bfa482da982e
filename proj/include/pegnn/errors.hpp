#pragma once

#include <stdexcept>
#include <string>

namespace pegnn {

// Error taxonomy; the CLI maps these onto exit codes (config 2, data 3,
// everything else 4).
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shape or dimension disagreement between tensors/layers.
struct DimensionError : Error {
  using Error::Error;
};

// Violated API precondition (empty split, zero-variance field, ...).
struct ContractError : Error {
  using Error::Error;
};

// Invalid numeric domain (log of non-positive entry).
struct DomainError : Error {
  using Error::Error;
};

// Out-of-range index (segment ids, gather indices).
struct IndexError : Error {
  using Error::Error;
};

// Malformed or inconsistent user data (CSV cells, checkpoint mismatch).
struct DataError : Error {
  using Error::Error;
};

// Invalid configuration or flag value.
struct ConfigError : Error {
  using Error::Error;
};

// Non-finite loss or other numerical breakdown at runtime.
struct NumericError : Error {
  using Error::Error;
};

}  // namespace pegnn
