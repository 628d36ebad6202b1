//! Exact-rational machinery for cones of curves and divisors on complete
//! simplicial toric pairs.
//!
//! The crate computes Mori and pseudo-effective cones, nef and effective
//! thresholds, discrepancies, extremal contractions and flips, and drives
//! the Minimal Model Program with scaling, recording full traces.  On top
//! of that sit certified cone comparisons (structure reports) and a small
//! abstract numerical mode for intersection data without a fan behind it.
//!
//! Every number in this crate is an exact rational; there is no floating
//! point anywhere.

pub mod linalg;
pub mod qcone;
pub mod numlat;
pub mod toric;
pub mod mmp;
pub mod structure;
pub mod fixtures;

use linalg::Vector;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("zero vector is not a valid generator or functional")]
    ZeroVector,

    #[error("cone is not pointed; lineality vector {0:?}")]
    NonPointed(Vector),

    #[error("fan is not complete: {0}")]
    IncompleteFan(String),

    #[error("fan is not simplicial: {0}")]
    NonSimplicialFan(String),

    #[error("invalid fan data: {0}")]
    InvalidFan(String),

    #[error("invalid pair data: {0}")]
    InvalidPair(String),

    #[error("numerical lattice mismatch: {0}")]
    LatticeMismatch(String),

    #[error("threshold undefined: {0}")]
    ThresholdUndefined(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("step cap of {0} exceeded; this signals an implementation bug")]
    StepCapExceeded(usize),

    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
