//! Exact computations around the maximal operator of a homogeneous tree.
//!
//! The model is the unit interval `(0, 1]` carved into `arity^depth` equal
//! leaf cells by an `arity`-adic tree. Step functions live on the leaves; the
//! tree maximal operator takes, at each leaf, the largest average over the
//! cells containing it. Everything downstream — weak-type and `L^p` bounds,
//! two-parameter sharp inequalities, Bellman-function constants, Hardy-type
//! averages of decreasing rearrangements, and extremal spine constructions —
//! is computed exactly in `f64` with fixed, deterministic summation orders so
//! that results are reproducible bit for bit.
//!
//! Module map:
//!
//! * [`tree`] — tree configs, step functions, integrals, rearrangements
//! * [`maximal`] — the maximal operator, its linearization, basic gaps
//! * [`bellman`] — `H_p`, its inverse `omega_p`, Bellman values, constants
//! * [`hardy`] — Hardy averages of profiles, continuous-side reports, sweeps
//! * [`verify`] — inequality reports and elementary-inequality oracles
//! * [`extremal`] — spine constructions, refinement ladders, stability

#![forbid(unsafe_code)]

pub mod bellman;
pub mod extremal;
pub mod hardy;
pub mod maximal;
pub mod numeric;
pub mod tree;
pub mod verify;

use thiserror::Error;

/// Errors shared by every module: invalid configurations, out-of-domain
/// parameters, and malformed serialized inputs.
#[derive(Debug, Error)]
pub enum Error {
    #[error("arity must be at least 2 (got {0})")]
    ArityTooSmall(u32),
    #[error("tree has {leaves} leaves, exceeding the budget of {budget}")]
    TooManyLeaves { leaves: u128, budget: u64 },
    #[error("expected {expected} leaf values, got {got}")]
    LeafCountMismatch { expected: u64, got: usize },
    #[error("leaf values must be finite and nonnegative (value {value} at index {index})")]
    BadLeafValue { index: usize, value: f64 },
    #[error("node is not part of this tree: {0}")]
    InvalidNode(String),
    #[error("{0}")]
    Domain(String),
    #[error("malformed input: {0}")]
    Parse(String),
}

impl Error {
    /// Shorthand for a named parameter-domain violation.
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub use hardy::{PowerLaw, Profile};
pub use maximal::GapReport;
pub use tree::{Rearranged, StepFunction, TreeConfig};
