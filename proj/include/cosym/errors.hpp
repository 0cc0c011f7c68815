#pragma once

#include <stdexcept>
#include <string>

namespace cosym {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A rank decision fell inside the ambiguity band around the singular-value
/// threshold; the caller must not trust a silent choice.
struct ToleranceAmbiguity : Error {
    using Error::Error;
};

/// An operation's stated precondition does not hold for the given inputs.
struct PreconditionViolation : Error {
    using Error::Error;
};

/// A query point (or a stencil around it) left the chart's guarded domain.
struct DomainGuardViolation : Error {
    using Error::Error;
};

/// The flat isomorphism matrix is numerically singular or ill-conditioned.
struct SingularFlat : Error {
    using Error::Error;
};

/// A quantity that must be constant over the sampled domain is not.
struct NonConstant : Error {
    using Error::Error;
};

/// A function that must be invariant under the group action is not.
struct NotInvariant : Error {
    using Error::Error;
};

/// A supplied flow map does not integrate the vector field it claims to.
struct FlowMismatch : Error {
    using Error::Error;
};

/// The Reeb direction is tangent to a group orbit at some sampled point.
struct TangencyDetected : Error {
    using Error::Error;
};

/// An iterative solve exhausted its iteration budget.
struct NoConvergence : Error {
    using Error::Error;
};

/// A constraint Jacobian lost row rank at an iterate.
struct RankDeficient : Error {
    using Error::Error;
};

/// The orbit/slice splitting is too ill-conditioned to trust.
struct SliceNotTransverse : Error {
    using Error::Error;
};

/// A state or matrix entry became NaN or infinite.
struct NonFinite : Error {
    using Error::Error;
};

/// A scenario file failed to parse.
struct ParseError : Error {
    using Error::Error;
};

/// A scenario parsed but violates a load-time invariant.
struct ValidationError : Error {
    using Error::Error;
};

/// A field built by a differential operator was evaluated at a deeper
/// derivative level than its inputs support.
struct DepthExceeded : Error {
    using Error::Error;
};

} // namespace cosym
