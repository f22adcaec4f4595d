#pragma once

#include <stdexcept>
#include <string>

namespace affd {

// Base for everything thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad argument values: out-of-range coordinates, invalid grid sizes, etc.
struct InvalidArgument : Error {
    using Error::Error;
};

// Tensor/buffer shape mismatches.
struct ShapeError : Error {
    using Error::Error;
};

// Malformed serialized artifacts (NPZ containers, manifests).
struct FormatError : Error {
    using Error::Error;
};

// Digest mismatch or corrupted artifact content.
struct IntegrityError : Error {
    using Error::Error;
};

// Non-finite values, degenerate normalization, undefined statistics.
struct NumericError : Error {
    using Error::Error;
};

// Inconsistent run configuration (missing teacher/bank for a variant, ...).
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace affd
