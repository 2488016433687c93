use log::info;
use serde::{Deserialize, Serialize};

use super::{RegionError, Result};
use crate::problem::ProblemSpec;
use crate::solver::{solve, solve_from, SolveResult, SolverConfig};

/// Bisection stops once the distortion is this close to the target.
pub const DISTORTION_TOL: f64 = 1e-3;
pub const MAX_BISECTION_STEPS: usize = 40;
/// Multiplier used for the low-distortion corner solve.
pub const LAMBDA_MAX: f64 = 1e3;

/// One solved multiplier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub lambda: f64,
    #[serde(deserialize_with = "nan_null::vec")]
    pub rates: Vec<f64>,
    #[serde(deserialize_with = "nan_null::scalar")]
    pub distortion: f64,
    #[serde(deserialize_with = "nan_null::scalar")]
    pub lagrangian: f64,
    pub converged: bool,
    pub iterations: usize,
    pub restarts: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SweepPoint {
    pub fn from_result(lambda: f64, config: &SolverConfig, r: &SolveResult) -> Self {
        Self {
            lambda,
            rates: r.rates.clone(),
            distortion: r.distortion,
            lagrangian: r.lagrangian,
            converged: r.converged,
            iterations: r.iterations(),
            restarts: r.restarts.len(),
            rate_weights: config.rate_weights.clone(),
            error: None,
        }
    }

    fn failed(lambda: f64, m: usize, config: &SolverConfig, error: String) -> Self {
        Self {
            lambda,
            rates: vec![f64::NAN; m],
            distortion: f64::NAN,
            lagrangian: f64::NAN,
            converged: false,
            iterations: 0,
            restarts: 0,
            rate_weights: config.rate_weights.clone(),
            error: Some(error),
        }
    }

    pub fn sum_rate(&self) -> f64 {
        self.rates.iter().sum()
    }
}

// JSON writes NaN as null; read it back as NaN.
mod nan_null {
    use serde::{Deserialize, Deserializer};

    pub fn scalar<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }

    pub fn vec<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Ok(Vec::<Option<f64>>::deserialize(d)?
            .into_iter()
            .map(|v| v.unwrap_or(f64::NAN))
            .collect())
    }
}

/// `0` followed by `count` geometrically spaced multipliers on `[1e-2, 1e3]`.
pub fn default_lambda_grid(count: usize) -> Vec<f64> {
    let (lo, hi) = (1e-2f64.ln(), 1e3f64.ln());
    std::iter::once(0.0)
        .chain((0..count).map(|k| {
            let t = if count == 1 { 0.0 } else { k as f64 / (count - 1) as f64 };
            (lo + t * (hi - lo)).exp()
        }))
        .collect()
}

fn check_grid(grid: &[f64]) -> Result<Vec<f64>> {
    if grid.is_empty() {
        return Err(RegionError::EmptyGrid);
    }
    if let Some(&bad) = grid.iter().find(|&&l| !(l >= 0.0) || !l.is_finite()) {
        return Err(RegionError::InvalidLambda(bad));
    }
    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted)
}

/// Solves every multiplier in ascending order, returning the full solutions.
///
/// With `warm_start`, each point after the first also runs one extra
/// initialization from the previous point's encoders alongside the usual
/// random restarts; the best Lagrangian wins.
pub fn sweep_solutions(
    spec: &ProblemSpec,
    lambda_grid: &[f64],
    config: &SolverConfig,
    warm_start: bool,
) -> Result<Vec<(SweepPoint, Option<SolveResult>)>> {
    let grid = check_grid(lambda_grid)?;
    config.with_lambda(0.0).validate(spec.num_sources())?;
    let mut out: Vec<(SweepPoint, Option<SolveResult>)> = Vec::with_capacity(grid.len());
    let mut previous: Option<SolveResult> = None;
    for &lambda in &grid {
        let cfg = config.with_lambda(lambda);
        let warm = if warm_start {
            previous.as_ref().map(|r| r.state.encoders.as_slice())
        } else {
            None
        };
        match solve_from(spec, &cfg, warm) {
            Ok(r) => {
                let point = SweepPoint::from_result(lambda, &cfg, &r);
                info!(
                    "lambda {lambda:.4e}: D = {:.6}, rates = {:?}, converged = {}",
                    point.distortion, point.rates, point.converged
                );
                previous = Some(r.clone());
                out.push((point, Some(r)));
            }
            Err(e) => {
                out.push((
                    SweepPoint::failed(lambda, spec.num_sources(), &cfg, e.to_string()),
                    None,
                ));
            }
        }
    }
    Ok(out)
}

/// One [`SweepPoint`] per multiplier, sorted by ascending `lambda`.
pub fn sweep(
    spec: &ProblemSpec,
    lambda_grid: &[f64],
    config: &SolverConfig,
    warm_start: bool,
) -> Result<Vec<SweepPoint>> {
    Ok(sweep_solutions(spec, lambda_grid, config, warm_start)?
        .into_iter()
        .map(|(p, _)| p)
        .collect())
}

fn solve_point(spec: &ProblemSpec, config: &SolverConfig, lambda: f64) -> Result<SweepPoint> {
    let cfg = config.with_lambda(lambda);
    Ok(SweepPoint::from_result(lambda, &cfg, &solve(spec, &cfg)?))
}

/// Bisects on `lambda` until the distortion is within [`DISTORTION_TOL`] of
/// `target_d`, or [`MAX_BISECTION_STEPS`] solves. Returns the closest point.
pub fn solve_for_distortion(spec: &ProblemSpec, target_d: f64, config: &SolverConfig) -> Result<SweepPoint> {
    solve_for_distortion_with(spec, target_d, config, &[])
}

/// Like [`solve_for_distortion`], reusing already solved points: the corner
/// solves are taken from `known` when present, and the tightest bracketing
/// pair seeds the bisection.
pub fn solve_for_distortion_with(
    spec: &ProblemSpec,
    target_d: f64,
    config: &SolverConfig,
    known: &[SweepPoint],
) -> Result<SweepPoint> {
    let usable: Vec<&SweepPoint> = known
        .iter()
        .filter(|p| p.error.is_none() && p.rate_weights == config.rate_weights)
        .collect();
    let find = |lambda: f64| usable.iter().find(|p| p.lambda == lambda).map(|p| (*p).clone());
    let zero_rate = match find(0.0) {
        Some(p) => p,
        None => solve_point(spec, config, 0.0)?,
    };
    let low_dist = match find(LAMBDA_MAX) {
        Some(p) => p,
        None => solve_point(spec, config, LAMBDA_MAX)?,
    };
    let (d_min, d_max) = (low_dist.distortion, zero_rate.distortion);
    if target_d > d_max + DISTORTION_TOL || target_d < d_min - DISTORTION_TOL || !target_d.is_finite() {
        return Err(RegionError::TargetOutOfRange {
            target: target_d,
            d_min,
            d_max,
        });
    }
    let mut best = zero_rate.clone();
    let consider = |p: &SweepPoint, best: &mut SweepPoint| {
        if (p.distortion - target_d).abs() < (best.distortion - target_d).abs() {
            *best = p.clone();
        }
    };
    consider(&low_dist, &mut best);
    if (best.distortion - target_d).abs() <= DISTORTION_TOL {
        return Ok(best);
    }

    // bracket: D(lo) > target >= D(hi), D non-increasing in lambda
    let (mut lo, mut hi) = (0.0, LAMBDA_MAX);
    for p in &usable {
        consider(p, &mut best);
        if p.distortion > target_d && p.lambda > lo && p.lambda < hi {
            lo = p.lambda;
        }
    }
    for p in &usable {
        if p.distortion <= target_d && p.lambda < hi && p.lambda > lo {
            hi = p.lambda;
        }
    }
    if (best.distortion - target_d).abs() <= DISTORTION_TOL {
        return Ok(best);
    }
    for _ in 0..MAX_BISECTION_STEPS {
        let mid = if lo > 0.0 { (lo * hi).sqrt() } else { hi / 10.0 };
        let p = solve_point(spec, config, mid)?;
        consider(&p, &mut best);
        if (p.distortion - target_d).abs() <= DISTORTION_TOL {
            break;
        }
        if p.distortion > target_d {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(best)
}
