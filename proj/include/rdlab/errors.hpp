#pragma once

#include <stdexcept>
#include <string>

namespace rdlab {

/// Base class for all failures raised by this library. Precondition
/// violations (bad sizes, invalid arguments) use std::invalid_argument
/// instead; everything derived from Error is a runtime/numerical condition.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Elimination hit a pivot below the hard floor; the operator is singular
/// or too ill-conditioned for an unpivoted tridiagonal solve.
class ZeroPivot : public Error {
public:
    using Error::Error;
};

/// QR iteration failed to deflate every eigenvalue within the sweep budget.
class NoConvergence : public Error {
public:
    using Error::Error;
};

/// Spectral queries on an empty eigenvalue set.
class EmptySpectrum : public Error {
public:
    using Error::Error;
};

/// Grid construction produced fewer than one interior node, or the
/// requested spacing does not tile the domain.
class InvalidGrid : public Error {
public:
    using Error::Error;
};

/// Polynomial initial profile requested with more freedom than anchors.
class DegreeTooHigh : public Error {
public:
    using Error::Error;
};

/// A linear-only scheme was asked to integrate a nonlinear reaction.
class IncompatibleStepper : public Error {
public:
    using Error::Error;
};

/// Requested representation or formula does not exist for this scheme.
class Unsupported : public Error {
public:
    using Error::Error;
};

/// Newton iterate left the divergence guard region.
class Diverged : public Error {
public:
    using Error::Error;
};

/// Newton linear solve met a singular Jacobian.
class SingularJacobian : public Error {
public:
    using Error::Error;
};

/// Logarithmic error measures need strictly positive inputs.
class NonPositiveError : public Error {
public:
    using Error::Error;
};

/// Relative error against a zero reference state is undefined.
class ZeroReference : public Error {
public:
    using Error::Error;
};

/// Trajectory too short for the requested analysis.
class TooShort : public Error {
public:
    using Error::Error;
};

/// Bisection bracket does not straddle the property being located.
class BracketInvalid : public Error {
public:
    using Error::Error;
};

/// Configuration file failed to parse or validate; message names the field.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace rdlab
