//! Shared error type for precondition and schema violations.
//!
//! Arithmetic between series of mismatched ring contexts is a programming
//! error and panics (binary operators assert); the variants here cover the
//! fallible public entry points: substitution preconditions, operator
//! exp/log preconditions, profile constraints and wire-format validation.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("ring context mismatch: {0}")]
    ContextMismatch(String),

    #[error("alpha mismatch: {0} vs {1}")]
    AlphaMismatch(u32, u32),

    #[error("substitution target for z{} has a nonzero constant term in z", index + 1)]
    ConstantTerm { index: usize },

    #[error("B+ requires a nonempty derivation list")]
    EmptyDerivationList,

    #[error("exp requires a zero t^0 coefficient")]
    ExpPrecondition,

    #[error("log requires an identity t^0 coefficient")]
    LogPrecondition,

    #[error("derivation coefficient vector violates {0}")]
    OrderViolation(String),

    #[error("weight {weight} exceeds the t-truncation bound {max_t}")]
    WeightExceedsTruncation { weight: u32, max_t: u32 },

    #[error("operation requires a commutative context")]
    CommutativeRequired,

    #[error("operation requires alpha >= 2 (got {0})")]
    AlphaTooSmall(u32),

    #[error("automorphism profile impossible: {0}")]
    ImpossibleProfile(String),

    #[error("element is zero")]
    ZeroElement,

    #[error("cost guard exceeded: {0} (pass --override-guards to proceed)")]
    GuardExceeded(String),

    #[error("invalid input: {0}")]
    Schema(String),
}

pub type Result<T> = std::result::Result<T, Error>;
