#pragma once

#include <stdexcept>
#include <string>

namespace orderiso {

// Raised when a back-and-forth step or a patch stage cannot produce a valid choice.
class ConstructionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A bounded scan ended without finding an admissible element.
class CapExceeded : public ConstructionError {
public:
    using ConstructionError::ConstructionError;
};

// An enumeration backed by a finite list ran out of elements.
class Exhausted : public ConstructionError {
public:
    using ConstructionError::ConstructionError;
};

// Malformed configuration or trace input.
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace orderiso
