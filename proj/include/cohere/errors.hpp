#pragma once

#include <stdexcept>
#include <string>

namespace cohere {

// Error hierarchy maps onto the CLI exit-code classes:
//   ConfigError -> 2, DataError (and subclasses) -> 3, RuntimeFailure -> 4.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct DataError : Error {
  using Error::Error;
};

// A required column is missing or the file layout is wrong.
struct SchemaError : DataError {
  using DataError::DataError;
};

// A row violates a corpus invariant (bad rating, duplicate id, ...).
struct ValidationError : DataError {
  using DataError::DataError;
};

struct ParseError : DataError {
  using DataError::DataError;
};

// Sidecar spans do not line up with tokenizer output.
struct AlignmentError : DataError {
  using DataError::DataError;
};

struct EmptyDocumentError : DataError {
  using DataError::DataError;
};

// Contract violation on an operation argument (empty list, size mismatch, ...).
struct DomainError : Error {
  using Error::Error;
};

struct RuntimeFailure : Error {
  using Error::Error;
};

// Training loss went non-finite.
struct TrainingDiverged : RuntimeFailure {
  using RuntimeFailure::RuntimeFailure;
};

}  // namespace cohere
