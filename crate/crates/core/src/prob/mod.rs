//! Exact finite-alphabet probability machinery.
//!
//! Joint PMFs are dense row-major tensors. All information quantities are in
//! bits, with the `0 log 0 = 0` convention applied entrywise.

mod info;
mod pmf;

pub use info::{
    binary_entropy, check_conditional_independence, conditional_mutual_information, entropy,
    mutual_information,
};
pub(crate) use pmf::for_each_index;
pub use pmf::{
    conditional, marginal, validate_joint, ConditionalPmf, DistortionMatrix, JointPmf,
    StochasticMatrix,
};

use thiserror::Error;

/// Absolute tolerance for normalization checks.
pub const NORMALIZATION_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProbError {
    #[error("negative probability {value} at flat index {index}")]
    NegativeProbability { index: usize, value: f64 },

    #[error("distribution not normalized (deviation {0:e})")]
    NotNormalized(f64),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("empty axis set")]
    EmptyAxisSet,

    #[error("axis sets overlap")]
    AxesOverlap,

    #[error("axis {axis} out of range for a {rank}-axis tensor")]
    AxisOutOfRange { axis: usize, rank: usize },

    #[error("value {0} out of range")]
    OutOfRange(f64),

    #[error("row {row} of stochastic matrix sums to {sum}")]
    NotStochastic { row: usize, sum: f64 },

    #[error("invalid distortion entry {value} at ({row}, {col})")]
    InvalidDistortion { row: usize, col: usize, value: f64 },
}

pub type Result<T> = std::result::Result<T, ProbError>;
