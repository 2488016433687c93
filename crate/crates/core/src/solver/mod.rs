//! Distributed Blahut-Arimoto alternating minimization.
//!
//! The objective for a multiplier `lambda` is
//!
//! ```text
//! L = sum_i sum_{y,x_i,w_i} p(y,x_i) q_i(w_i|x_i) log2 q_i(w_i|x_i) / Q_i(w_i|y)
//!     + lambda * E[d(T, T_hat)]
//! ```
//!
//! and each of the three variable blocks (marginals `Q_i`, encoders `q_i`,
//! decoder `q'`) has a closed-form minimizer with the other blocks fixed. The
//! schedule cycles over users, alternating `Q_i` and `q_i` to convergence
//! before refreshing the Bayes decoder.

mod schedule;
mod state;
mod updates;

pub use schedule::{initial_state, solve, solve_from, RestartSummary, SolveResult};
pub use state::{Decoder, InitMode, RegionStatus, SolverConfig, SolverState};
pub use updates::{
    encoder_cost, expected_distortion, lagrangian, rate_terms, rates, update_decoder,
    update_encoder, update_marginal, weighted_lagrangian, MarginalUpdate, LOG_FLOOR,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("state does not match the problem: {0}")]
    StateMismatch(String),

    #[error(transparent)]
    Prob(#[from] crate::prob::ProbError),
}

pub type Result<T> = std::result::Result<T, SolverError>;
