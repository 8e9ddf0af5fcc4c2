#pragma once

#include <stdexcept>
#include <string>

namespace ssc {

/// Base class for all errors raised by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Mismatched vector/matrix dimensions.
struct DimensionError : Error {
    using Error::Error;
};

/// Malformed input data: indices out of range, unsorted index sets,
/// inconsistent partitions.
struct StructureError : Error {
    using Error::Error;
};

/// Invalid argument value (out-of-range counts, nonpositive parameters).
struct ArgumentError : Error {
    using Error::Error;
};

/// Matrix failed the positive-definiteness check during factorization.
struct DefinitenessError : Error {
    using Error::Error;
};

/// Coefficient function nonpositive at a quadrature point.
struct EllipticityError : Error {
    using Error::Error;
};

/// Overlap layer count incompatible with the grid.
struct OverlapError : Error {
    using Error::Error;
};

/// Eigenvalue estimation failed after all restarts.
struct EstimationError : Error {
    using Error::Error;
};

/// A computed quantity violated a numerical consistency bound.
struct ConsistencyError : Error {
    using Error::Error;
};

/// Problem size exceeds a brute-force cap.
struct CapError : Error {
    using Error::Error;
};

/// Matrix singular to working precision.
struct SingularError : Error {
    using Error::Error;
};

/// Invalid or unparseable configuration.
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace ssc
