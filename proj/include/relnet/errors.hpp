#pragma once

#include <stdexcept>
#include <string>

namespace relnet {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Shape or dimension mismatch between operands.
struct ShapeError : Error {
    using Error::Error;
};

/// NaN or Inf encountered where a finite value is required.
struct NumericError : Error {
    using Error::Error;
};

/// A caller violated a documented precondition.
struct ContractError : Error {
    using Error::Error;
};

/// Two evaluations of a supposedly deterministic function disagreed.
struct DeterminismError : Error {
    using Error::Error;
};

/// Token index outside the vocabulary.
struct VocabError : Error {
    using Error::Error;
};

/// Label not present in the class catalog.
struct CatalogError : Error {
    using Error::Error;
};

struct ParseError : Error {
    using Error::Error;
};

/// Episode sampling could not satisfy the requested N/K/T.
struct SamplingError : Error {
    using Error::Error;
};

struct CheckpointError : Error {
    using Error::Error;
};

}  // namespace relnet
