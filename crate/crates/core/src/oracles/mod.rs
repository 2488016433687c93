//! Independent reference computations for checking the solver: the binary
//! Wyner-Ziv function, an exhaustive grid minimizer of the Lagrangian and a
//! stationarity residual.

mod brute_force;
mod kkt;
pub mod reference;
mod wyner_ziv;

pub use brute_force::{brute_force_lagrangian_min, BruteForceMin, MAX_GRID_POINTS};
pub use kkt::{encoder_gradient, kkt_residual, kkt_residual_weighted, ACTIVE_THRESHOLD};
pub use wyner_ziv::{wyner_ziv_binary, wz_g, WzCurve, GRID_STEP};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("grid exceeds {limit} encoder configurations")]
    GridTooLarge { limit: u64 },

    #[error("resolution {0} must be 1/n for a positive integer n")]
    InvalidResolution(f64),
}

pub type Result<T> = std::result::Result<T, OracleError>;
