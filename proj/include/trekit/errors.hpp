#pragma once

#include <stdexcept>

namespace trekit {

/// Base class for all toolkit errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Input matrix violates the hermiticity tolerance.
struct NonHermitianInput : Error {
  using Error::Error;
};

/// Input has an eigenvalue below the negative clamping band.
struct NotPositiveSemidefinite : Error {
  using Error::Error;
};

/// Density matrix fails the unit-trace check.
struct InvalidState : Error {
  using Error::Error;
};

/// The eigensolver did not converge.
struct EigensolverFailure : Error {
  using Error::Error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

/// A direction leaks outside the support of a singular base operator,
/// or an operation requires a support containment that does not hold.
struct SupportMismatch : Error {
  using Error::Error;
};

struct ParameterOutOfRange : Error {
  using Error::Error;
};

/// Panel doubling hit the node cap before reaching the convergence tolerance.
struct QuadratureNonConvergence : Error {
  using Error::Error;
};

/// Malformed ensemble or suite configuration.
struct InvalidSpec : Error {
  using Error::Error;
};

/// Malformed matrix or report file.
struct ParseError : Error {
  using Error::Error;
};

}  // namespace trekit
