//! Oracle cross-checks of solved sweeps, shared by the `verify` command and
//! the test suite.

use std::fmt;

use crate::oracles::{brute_force_lagrangian_min, kkt_residual_weighted, WzCurve};
use crate::problem::ProblemSpec;
use crate::region::{corollary4_rates, subset_bounds, sweep_solutions, SweepPoint};
use crate::solver::{solve, SolveResult, SolverConfig};

pub const DESCENT_SLACK: f64 = 1e-10;
pub const KKT_TOL: f64 = 1e-5;
pub const COROLLARY4_TOL: f64 = 1e-9;
pub const BOUND_TOL: f64 = 1e-6;
pub const MONOTONE_SLACK: f64 = 1e-4;
pub const WZ_TOL: f64 = 0.01;
pub const BRUTE_FORCE_SLACK: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: String) -> Self {
        Self {
            name: name.into(),
            passed,
            detail,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

/// Largest single-step increase over every restart trace.
pub fn max_ascent(result: &SolveResult) -> f64 {
    result
        .restarts
        .iter()
        .flat_map(|r| r.trace.windows(2).map(|w| w[1] - w[0]))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Descent, stationarity, rate identity, bound and monotonicity checks on
/// the solved points of one sweep.
pub fn check_sweep(spec: &ProblemSpec, config: &SolverConfig, solved: &[(SweepPoint, Option<SolveResult>)]) -> Vec<Check> {
    let name = &spec.name;
    let weights = config.weights(spec.num_sources());
    let with_lambda: Vec<(f64, &SolveResult)> = solved
        .iter()
        .filter_map(|(p, r)| r.as_ref().map(|r| (p.lambda, r)))
        .collect();
    let results: Vec<&SolveResult> = with_lambda.iter().map(|(_, r)| *r).collect();
    let converged: Vec<(f64, &SolveResult)> = with_lambda.iter().copied().filter(|(_, r)| r.converged).collect();
    let mut checks = Vec::new();

    let ascent = results.iter().map(|r| max_ascent(r)).fold(f64::NEG_INFINITY, f64::max);
    let traces: usize = results.iter().map(|r| r.restarts.len()).sum();
    checks.push(Check::new(
        format!("{name}: descent"),
        ascent <= DESCENT_SLACK,
        format!("{traces} traces, largest step increase {ascent:.3e}"),
    ));

    let kkt = converged
        .iter()
        .map(|(lambda, r)| kkt_residual_weighted(spec, &r.state, *lambda, &weights))
        .fold(0.0, f64::max);
    checks.push(Check::new(
        format!("{name}: kkt"),
        !converged.is_empty() && kkt < KKT_TOL,
        format!("{} converged points, max residual {kkt:.3e}", converged.len()),
    ));

    let mut c4 = 0.0f64;
    let mut gap_violation = 0.0f64;
    let mut sum_rate_violation = 0.0f64;
    for r in &results {
        if let Ok(c) = corollary4_rates(spec, &r.state) {
            c4 = c.iter().zip(&r.rates).map(|(a, b)| (a - b).abs()).fold(c4, f64::max);
        }
        if let Ok(report) = subset_bounds(spec, &r.state) {
            for e in &report.entries {
                gap_violation = gap_violation.max(e.inner - e.outer);
            }
            if r.converged {
                sum_rate_violation = sum_rate_violation.max(report.max_sum_rate_violation());
            }
        }
    }
    checks.push(Check::new(
        format!("{name}: rate identity"),
        c4 <= COROLLARY4_TOL,
        format!("max |I(X;W) - I(W;Y) - R| = {c4:.3e}"),
    ));
    checks.push(Check::new(
        format!("{name}: bounds"),
        gap_violation <= 1e-9 && sum_rate_violation <= BOUND_TOL,
        format!("max inner - outer {gap_violation:.3e}, max sum-rate shortfall {sum_rate_violation:.3e}"),
    ));

    let points: Vec<&SweepPoint> = solved.iter().map(|(p, _)| p).filter(|p| p.error.is_none()).collect();
    let rise = points
        .windows(2)
        .map(|w| w[1].distortion - w[0].distortion)
        .fold(0.0, f64::max);
    checks.push(Check::new(
        format!("{name}: monotone distortion"),
        rise <= MONOTONE_SLACK,
        format!("largest increase of D along the sweep {rise:.3e}"),
    ));
    checks
}

/// Sweeps a binary Wyner-Ziv instance and compares every point with
/// `D` in `[0.01, p - 0.01]` against the closed-form curve.
pub fn check_wyner_ziv(spec: &ProblemSpec, p: f64, grid: &[f64], config: &SolverConfig) -> Check {
    let name = format!("{}: wyner-ziv curve", spec.name);
    let curve = match WzCurve::new(p) {
        Ok(c) => c,
        Err(e) => return Check::new(name, false, e.to_string()),
    };
    let solved = match sweep_solutions(spec, grid, config, true) {
        Ok(s) => s,
        Err(e) => return Check::new(name, false, e.to_string()),
    };
    let mut worst = 0.0f64;
    let mut compared = 0;
    for (pt, _) in &solved {
        if pt.error.is_some() || !(0.01..=p - 0.01).contains(&pt.distortion) {
            continue;
        }
        if let Ok(r) = curve.rate(pt.distortion) {
            worst = worst.max((pt.rates[0] - r).abs());
            compared += 1;
        }
    }
    Check::new(
        name,
        compared > 0 && worst <= WZ_TOL,
        format!("{compared} points compared, max |R - R_wz| = {worst:.3e}"),
    )
}

/// Solver against exhaustive grid search at `|W| = 2` for a one-source problem.
pub fn check_brute_force(spec: &ProblemSpec, lambdas: &[f64], resolution: f64, config: &SolverConfig) -> Check {
    let name = format!("{}: brute force", spec.name);
    let small = match spec.with_aux_sizes(vec![2; spec.num_sources()]) {
        Ok(s) => s,
        Err(e) => return Check::new(name, false, e.to_string()),
    };
    let mut worst = f64::NEG_INFINITY;
    for &lambda in lambdas {
        let cfg = config.with_lambda(lambda);
        let solver = match solve(&small, &cfg) {
            Ok(r) => r.lagrangian,
            Err(e) => return Check::new(name, false, e.to_string()),
        };
        let grid = match brute_force_lagrangian_min(&small, lambda, resolution) {
            Ok(b) => b.value,
            Err(e) => return Check::new(name, false, e.to_string()),
        };
        worst = worst.max(solver - grid);
    }
    Check::new(
        name,
        worst <= BRUTE_FORCE_SLACK,
        format!("max solver - grid minimum {worst:.3e} over lambda {lambdas:?}"),
    )
}
