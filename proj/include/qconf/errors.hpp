#pragma once

#include <stdexcept>
#include <string>

namespace qconf {

// Error taxonomy shared by all modules. The CLI maps these onto exit codes:
// ParameterError/DomainError -> 2, solver-type failures -> 3.

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A point lies outside the natural domain of a mapping or region.
struct DomainError : Error {
    using Error::Error;
};

/// Derivative data requested at a point where the mapping is singular
/// or degenerate (cusp axis, radial-map origin and axes).
struct SingularityError : Error {
    using Error::Error;
};

/// Invalid exponents, malformed spec strings, precondition violations.
struct ParameterError : Error {
    using Error::Error;
};

/// Refinement or iteration budget exhausted without a verdict.
struct InconclusiveError : Error {
    using Error::Error;
};

/// Grid too coarse for the requested domain (disconnected mask).
struct ResolutionError : Error {
    using Error::Error;
};

/// Iterative solver failed to converge within its cap.
struct SolverError : Error {
    using Error::Error;
};

/// Operation requires an analytic inverse the mapping does not provide.
struct UnsupportedMapError : Error {
    using Error::Error;
};

} // namespace qconf
