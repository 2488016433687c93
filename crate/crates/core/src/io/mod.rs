//! Problem files, result serialization and contour grids.

mod bundle;
mod contour;
mod problem_file;
mod table;

pub use bundle::{PointBounds, ResultBundle, RunMetadata};
pub use contour::{build_contour_grid, emit_contour_grid, ContourGrid, CONTOUR_SENTINEL};
pub use problem_file::{
    bundled_problem, parse_problem, parse_problem_str, to_toml, DistortionDef, JointDef,
    LoadedProblem, ProblemFile, Sizes, SolverOverrides, TRule, BUNDLED_PROBLEMS,
};
pub use table::{format_float, sweep_csv};

use std::path::PathBuf;

use thiserror::Error;

use crate::prob::ProbError;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("parse error in {origin}: {message}")]
    Parse { origin: String, message: String },

    #[error("invalid problem: {0}")]
    Validation(#[from] ProbError),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("contour grid needs at least {needed} usable points, got {got}")]
    NotEnoughPoints { needed: usize, got: usize },

    #[error("contour grid needs exactly 2 sources, got {0}")]
    WrongSourceCount(usize),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, IoError>;
