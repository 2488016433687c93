//! Numerical rate-distortion regions for distributed remote source coding
//! with side information at the decoder.
//!
//! `M` encoders observe correlated sources `X_1..X_M`; a decoder that also
//! sees `Y` reconstructs a latent `T`. The [`solver`] module runs a distributed
//! Blahut-Arimoto alternating minimization of the rate/distortion Lagrangian,
//! [`region`] traces curves and bound reports from it, and [`oracles`] holds
//! independent reference computations used to check the solver.

pub mod catalog;
pub mod cli;
pub mod io;
pub mod oracles;
pub mod prob;
pub mod problem;
pub mod region;
pub mod solver;
pub mod tensor;
pub mod verify;

pub use problem::ProblemSpec;
