#pragma once

#include <stdexcept>
#include <string>

namespace xmesh {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Bad arguments or inconsistent inputs (sizes, degenerate geometry, ...).
struct InvalidInput : Error {
    using Error::Error;
};

/// File/format problems; message carries the offending line when known.
struct ParseError : Error {
    using Error::Error;
};

/// Geometric queries that found nothing (point outside mesh, ...).
struct NotFound : Error {
    using Error::Error;
};

/// Linear algebra failures (singular matrix, ...).
struct SolverError : Error {
    using Error::Error;
};

/// A time step exhausted its iteration budget without meeting the tolerance.
struct NonConvergence : SolverError {
    using SolverError::SolverError;
};

} // namespace xmesh
