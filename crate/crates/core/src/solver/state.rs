use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Result, SolverError};
use crate::prob::{StochasticMatrix, NORMALIZATION_TOL};
use crate::problem::ProblemSpec;

/// Reconstruction rule `q'(t_hat | w_1..w_M, y)`.
///
/// Stored densely over `(w_1, .., w_M, y, t_hat)` in row-major order so that
/// each `(w, y)` slice over `t_hat` is contiguous.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decoder {
    aux_sizes: Vec<usize>,
    y_size: usize,
    t_hat_size: usize,
    probs: Vec<f64>,
}

impl Decoder {
    pub fn new(
        aux_sizes: Vec<usize>,
        y_size: usize,
        t_hat_size: usize,
        probs: Vec<f64>,
    ) -> Result<Self> {
        let d = Self {
            aux_sizes,
            y_size,
            t_hat_size,
            probs,
        };
        d.validate()?;
        Ok(d)
    }

    /// Deterministic decoder from one reconstruction index per `(w, y)` slice.
    pub fn deterministic(
        aux_sizes: Vec<usize>,
        y_size: usize,
        t_hat_size: usize,
        choices: &[usize],
    ) -> Self {
        let mut probs = vec![0.0; choices.len() * t_hat_size];
        for (slice, &c) in choices.iter().enumerate() {
            probs[slice * t_hat_size + c] = 1.0;
        }
        Self {
            aux_sizes,
            y_size,
            t_hat_size,
            probs,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n_slices = self.num_slices();
        if self.probs.len() != n_slices * self.t_hat_size {
            return Err(SolverError::StateMismatch(format!(
                "decoder has {} entries, expected {}",
                self.probs.len(),
                n_slices * self.t_hat_size
            )));
        }
        for s in 0..n_slices {
            let row = self.slice(s);
            let sum: f64 = row.iter().sum();
            if row.iter().any(|&v| !(v >= 0.0)) || (sum - 1.0).abs() > NORMALIZATION_TOL {
                return Err(SolverError::StateMismatch(format!(
                    "decoder slice {s} is not a distribution (sum {sum})"
                )));
            }
        }
        Ok(())
    }

    pub fn aux_sizes(&self) -> &[usize] {
        &self.aux_sizes
    }

    pub fn y_size(&self) -> usize {
        self.y_size
    }

    pub fn t_hat_size(&self) -> usize {
        self.t_hat_size
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Number of `(w, y)` slices.
    pub fn num_slices(&self) -> usize {
        self.aux_sizes.iter().product::<usize>() * self.y_size
    }

    /// Distribution over `t_hat` for flat slice index `w_flat * |Y| + y`.
    pub fn slice(&self, slice: usize) -> &[f64] {
        &self.probs[slice * self.t_hat_size..(slice + 1) * self.t_hat_size]
    }

    pub fn get(&self, w_flat: usize, y: usize, t_hat: usize) -> f64 {
        self.probs[(w_flat * self.y_size + y) * self.t_hat_size + t_hat]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitMode {
    /// Every encoder row uniform. Deterministic, but a saddle for most problems.
    Uniform,
    /// Each encoder row drawn from a symmetric Dirichlet(1).
    RandomDirichlet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub lambda: f64,
    /// Relative Lagrangian change that ends a user's inner `(Q_i, q_i)` loop.
    pub inner_tol: f64,
    /// Relative Lagrangian change across a full user cycle.
    pub outer_tol: f64,
    /// Largest stationarity gap of an encoder row at which the inner loop may stop.
    pub stationarity_tol: f64,
    pub max_inner_iters: usize,
    pub max_outer_cycles: usize,
    pub restarts: usize,
    pub rng_seed: u64,
    pub init_mode: InitMode,
    /// Per-source weights on the rate terms. `None` means all ones.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_weights: Option<Vec<f64>>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            inner_tol: 1e-9,
            outer_tol: 1e-8,
            stationarity_tol: 1e-7,
            max_inner_iters: 2000,
            max_outer_cycles: 200,
            restarts: 8,
            rng_seed: 0,
            init_mode: InitMode::RandomDirichlet,
            rate_weights: None,
        }
    }
}

impl SolverConfig {
    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self {
            lambda,
            ..self.clone()
        }
    }

    pub fn validate(&self, num_sources: usize) -> Result<()> {
        let bad = |msg: String| Err(SolverError::InvalidConfig(msg));
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return bad(format!("lambda must be finite and >= 0, got {}", self.lambda));
        }
        if !(self.inner_tol > 0.0) || !(self.outer_tol > 0.0) || !(self.stationarity_tol > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if self.max_inner_iters == 0 || self.max_outer_cycles == 0 || self.restarts == 0 {
            return bad("iteration and restart counts must be >= 1".into());
        }
        if let Some(w) = &self.rate_weights {
            if w.len() != num_sources {
                return bad(format!("{} rate weights for {num_sources} sources", w.len()));
            }
            if w.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
                return bad(format!("rate weights must be positive, got {w:?}"));
            }
        }
        Ok(())
    }

    pub fn weights(&self, num_sources: usize) -> Vec<f64> {
        self.rate_weights
            .clone()
            .unwrap_or_else(|| vec![1.0; num_sources])
    }
}

/// Iterate of the alternating minimization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverState {
    /// `q_i(w_i | x_i)`, one `|X_i| x |W_i|` matrix per source.
    pub encoders: Vec<StochasticMatrix>,
    /// `Q_i(w_i | y)`, one `|Y| x |W_i|` matrix per source.
    pub marginals: Vec<StochasticMatrix>,
    pub decoder: Decoder,
    pub lagrangian: f64,
    /// Outer cycle counter.
    pub cycle: usize,
    /// User currently being updated (0-based).
    pub user: usize,
    /// Inner iterations spent on the current user.
    pub inner_iter: usize,
}

impl SolverState {
    pub fn validate(&self, spec: &ProblemSpec) -> Result<()> {
        let m = spec.num_sources();
        if self.encoders.len() != m || self.marginals.len() != m {
            return Err(SolverError::StateMismatch(format!(
                "expected {m} encoders and marginals"
            )));
        }
        for i in 0..m {
            let (q, big_q) = (&self.encoders[i], &self.marginals[i]);
            if q.rows() != spec.source_sizes()[i] || q.cols() != spec.aux_sizes()[i] {
                return Err(SolverError::StateMismatch(format!("encoder {i} has wrong shape")));
            }
            if big_q.rows() != spec.y_size() || big_q.cols() != spec.aux_sizes()[i] {
                return Err(SolverError::StateMismatch(format!("marginal {i} has wrong shape")));
            }
            q.validate()?;
            big_q.validate()?;
        }
        if self.decoder.aux_sizes() != spec.aux_sizes()
            || self.decoder.y_size() != spec.y_size()
            || self.decoder.t_hat_size() != spec.t_hat_size()
        {
            return Err(SolverError::StateMismatch("decoder has wrong shape".into()));
        }
        self.decoder.validate()
    }
}

/// Whether the computed rates describe the exact region or only a bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionStatus {
    /// Sources are conditionally independent given the side information.
    Exact,
    /// Conditional independence fails; the result is only a bound.
    Bound,
}

impl fmt::Display for RegionStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegionStatus::Exact => f.write_str("exact region"),
            RegionStatus::Bound => f.write_str("inner bound / upper bound on region"),
        }
    }
}
