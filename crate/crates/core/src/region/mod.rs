//! Rate-distortion curves by multiplier sweeps, bisection to a distortion
//! target, and subset bound reports.

mod bounds;
mod sweep;

pub use bounds::{corollary4_rates, subset_bounds, SubsetBound, SubsetBoundReport, MAX_SOURCES};
pub use sweep::{
    default_lambda_grid, solve_for_distortion, solve_for_distortion_with, sweep, sweep_solutions,
    SweepPoint, DISTORTION_TOL, LAMBDA_MAX, MAX_BISECTION_STEPS,
};

use thiserror::Error;

use crate::prob::ProbError;
use crate::solver::SolverError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegionError {
    #[error("lambda grid is empty")]
    EmptyGrid,

    #[error("invalid lambda {0}: must be finite and >= 0")]
    InvalidLambda(f64),

    #[error("target distortion {target} outside the feasible range [{d_min:.6e}, {d_max:.6e}]")]
    TargetOutOfRange { target: f64, d_min: f64, d_max: f64 },

    #[error("subset enumeration supports at most {limit} sources, got {m}")]
    TooManySources { m: usize, limit: usize },

    #[error(transparent)]
    Solver(#[from] SolverError),

    #[error(transparent)]
    Prob(#[from] ProbError),
}

pub type Result<T> = std::result::Result<T, RegionError>;
