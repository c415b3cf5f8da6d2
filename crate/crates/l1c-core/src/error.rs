//! Error type shared across the crate.

use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A solver or problem parameter violates its documented range.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    /// An oracle or intermediate quantity produced NaN or infinity.
    #[error("non-finite value in {context}")]
    NonFinite { context: &'static str },
    /// An operation that requires a nonempty index set received an empty one.
    #[error("empty index set in {context}")]
    EmptyIndexSet { context: &'static str },
    /// Vector or matrix dimensions do not agree.
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },
    /// The capped CG loop exceeded its hard iteration cap. This signals a
    /// contract bug (the method terminates in at most the operator dimension
    /// steps in exact arithmetic) and is never expected on sane inputs.
    #[error("capped CG exceeded its iteration cap after {iterations} iterations")]
    CappedCgStalled { iterations: usize },
    /// `remark23_bound` requires every component of the base point nonzero.
    #[error("zero component at index {index} in {context}")]
    ZeroComponent { context: &'static str, index: usize },
}
