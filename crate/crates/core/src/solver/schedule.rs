use log::{debug, warn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use super::state::{Decoder, InitMode, RegionStatus, SolverConfig, SolverState};
use super::updates::{
    expected_distortion, rates, update_decoder, update_encoder, update_marginal,
    weighted_lagrangian,
};
use super::{Result, SolverError};
use crate::oracles::ACTIVE_THRESHOLD;
use crate::prob::{check_conditional_independence, StochasticMatrix};
use crate::problem::ProblemSpec;

/// Tolerance for the conditional-independence precondition.
const CI_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartSummary {
    pub seed: u64,
    pub lagrangian: f64,
    pub converged: bool,
    pub cycles: usize,
    pub inner_iterations: usize,
    /// Lagrangian after every individual update, starting from the initial state.
    pub trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub state: SolverState,
    pub rates: Vec<f64>,
    pub distortion: f64,
    pub lagrangian: f64,
    pub converged: bool,
    pub restart_index_of_best: usize,
    pub lagrangian_trace: Vec<f64>,
    pub restarts: Vec<RestartSummary>,
    pub region_status: RegionStatus,
}

impl SolveResult {
    pub fn iterations(&self) -> usize {
        self.restarts.iter().map(|r| r.inner_iterations).sum()
    }
}

fn random_row(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut row: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let z: f64 = row.iter().sum();
    row.iter_mut().for_each(|v| *v /= z);
    row
}

fn random_channel(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> StochasticMatrix {
    let probs = (0..rows).flat_map(|_| random_row(rng, cols)).collect();
    StochasticMatrix::new_unchecked(rows, cols, probs)
}

/// Builds a full state from encoders: induced marginals, then the Bayes decoder.
pub fn initial_state(spec: &ProblemSpec, encoders: Vec<StochasticMatrix>) -> SolverState {
    let m = spec.num_sources();
    let mut state = SolverState {
        marginals: (0..m)
            .map(|i| StochasticMatrix::uniform(spec.y_size(), spec.aux_sizes()[i]))
            .collect(),
        encoders,
        decoder: Decoder::deterministic(
            spec.aux_sizes().to_vec(),
            spec.y_size(),
            spec.t_hat_size(),
            &vec![0; spec.aux_sizes().iter().product::<usize>() * spec.y_size()],
        ),
        lagrangian: f64::NAN,
        cycle: 0,
        user: 0,
        inner_iter: 0,
    };
    for i in 0..m {
        state.marginals[i] = update_marginal(spec, &state, i).channel;
    }
    state.decoder = update_decoder(spec, &state);
    state
}

fn initial_encoders(spec: &ProblemSpec, mode: InitMode, seed: u64) -> Vec<StochasticMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    spec.source_sizes()
        .iter()
        .zip(spec.aux_sizes())
        .map(|(&nx, &nw)| match mode {
            InitMode::Uniform => StochasticMatrix::uniform(nx, nw),
            InitMode::RandomDirichlet => random_channel(&mut rng, nx, nw),
        })
        .collect()
}

fn relative_change(before: f64, after: f64) -> f64 {
    (before - after).abs() / after.abs().max(1e-12)
}

/// Stationarity gap of `old` as read off one encoder update.
///
/// The partial derivative of the Lagrangian at `old` equals
/// `p(x) log2(old / new)` up to a per-row constant, so this is the spread of
/// that quantity over the support of `old` plus any shortfall of near-zero
/// entries below the support level.
fn stationarity_gap(spec: &ProblemSpec, m: usize, old: &StochasticMatrix, new: &StochasticMatrix) -> f64 {
    let pxy = spec.source_side_joint(m);
    let ny = spec.y_size();
    let mut worst: f64 = 0.0;
    for x in 0..old.rows() {
        let px: f64 = pxy.probs()[x * ny..(x + 1) * ny].iter().sum();
        if px <= 0.0 {
            continue;
        }
        let partial = |w: usize| {
            let (a, b) = (old.get(x, w), new.get(x, w));
            (a > 0.0 && b > 0.0).then(|| px * (a / b).log2())
        };
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        let mut inactive_min = f64::INFINITY;
        for w in 0..old.cols() {
            match partial(w) {
                Some(g) if old.get(x, w) > ACTIVE_THRESHOLD => {
                    lo = lo.min(g);
                    hi = hi.max(g);
                }
                Some(g) => inactive_min = inactive_min.min(g),
                None => {}
            }
        }
        worst = worst.max(hi - lo).max(lo - inactive_min);
    }
    worst
}

struct Run {
    state: SolverState,
    summary: RestartSummary,
}

fn run_one(spec: &ProblemSpec, config: &SolverConfig, start: SolverState, seed: u64) -> Run {
    let m = spec.num_sources();
    let weights = config.weights(m);
    let lambda = config.lambda;
    let eval = |s: &SolverState| weighted_lagrangian(spec, s, lambda, &weights);

    let mut state = start;
    state.lagrangian = eval(&state);
    let mut trace = vec![state.lagrangian];
    let mut converged = false;
    let mut cycles = 0;
    let mut inner_iterations = 0;

    for cycle in 0..config.max_outer_cycles {
        cycles = cycle + 1;
        state.cycle = cycle;
        let cycle_start = state.lagrangian;
        let mut all_stationary = true;
        let mut decoder_stable = true;
        for user in 0..m {
            state.user = user;
            // The rate weight only rescales this user's rate against the
            // distortion, so it enters the encoder update as lambda / weight.
            let effective = lambda / weights[user];
            let mut gap = f64::INFINITY;
            for k in 0..config.max_inner_iters {
                state.inner_iter = k + 1;
                inner_iterations += 1;
                let before = state.lagrangian;
                state.marginals[user] = update_marginal(spec, &state, user).channel;
                state.lagrangian = eval(&state);
                trace.push(state.lagrangian);
                let updated = update_encoder(spec, &state, user, effective);
                gap = stationarity_gap(spec, user, &state.encoders[user], &updated);
                state.encoders[user] = updated;
                state.lagrangian = eval(&state);
                trace.push(state.lagrangian);
                if relative_change(before, state.lagrangian) < config.inner_tol
                    && gap < config.stationarity_tol
                {
                    break;
                }
            }
            all_stationary &= gap < config.stationarity_tol;
            let decoder = update_decoder(spec, &state);
            decoder_stable &= decoder == state.decoder;
            state.decoder = decoder;
            state.lagrangian = eval(&state);
            trace.push(state.lagrangian);
        }
        if relative_change(cycle_start, state.lagrangian) < config.outer_tol
            && all_stationary
            && decoder_stable
        {
            converged = true;
            break;
        }
    }
    // leave every Q_i equal to the marginal induced by q_i
    for user in 0..m {
        state.marginals[user] = update_marginal(spec, &state, user).channel;
        state.lagrangian = eval(&state);
        trace.push(state.lagrangian);
    }
    Run {
        summary: RestartSummary {
            seed,
            lagrangian: state.lagrangian,
            converged,
            cycles,
            inner_iterations,
            trace,
        },
        state,
    }
}

fn finish(spec: &ProblemSpec, runs: Vec<Run>) -> SolveResult {
    let region_status = match check_conditional_independence(spec.joint(), CI_TOL) {
        Ok((true, _)) => RegionStatus::Exact,
        Ok((false, dev)) => {
            warn!(
                "{}: sources are not conditionally independent given the side information \
                 (max deviation {dev:.3e}); results are an {}",
                spec.name,
                RegionStatus::Bound
            );
            RegionStatus::Bound
        }
        Err(_) => RegionStatus::Bound,
    };
    let mut best = 0;
    for (i, run) in runs.iter().enumerate() {
        if run.summary.lagrangian < runs[best].summary.lagrangian {
            best = i;
        }
    }
    let state = runs[best].state.clone();
    let summaries: Vec<RestartSummary> = runs.into_iter().map(|r| r.summary).collect();
    debug!(
        "{}: best restart {best} of {}, L = {}",
        spec.name,
        summaries.len(),
        summaries[best].lagrangian
    );
    SolveResult {
        rates: rates(spec, &state),
        distortion: expected_distortion(spec, &state),
        lagrangian: state.lagrangian,
        converged: summaries[best].converged,
        restart_index_of_best: best,
        lagrangian_trace: summaries[best].trace.clone(),
        restarts: summaries,
        region_status,
        state,
    }
}

fn check_encoder_shapes(spec: &ProblemSpec, encoders: &[StochasticMatrix]) -> Result<()> {
    let shapes_match = encoders.len() == spec.num_sources()
        && encoders.iter().enumerate().all(|(i, q)| {
            q.rows() == spec.source_sizes()[i] && q.cols() == spec.aux_sizes()[i]
        });
    if !shapes_match {
        return Err(SolverError::StateMismatch(
            "warm-start encoders do not match the problem".into(),
        ));
    }
    Ok(())
}

/// Runs `config.restarts` independent initializations (seeds `rng_seed + r`)
/// and returns the one with minimum final Lagrangian.
pub fn solve(spec: &ProblemSpec, config: &SolverConfig) -> Result<SolveResult> {
    solve_from(spec, config, None)
}

/// Like [`solve`], optionally adding a warm-started run from `warm` encoders.
/// The warm run is listed first, so it wins exact ties.
pub fn solve_from(
    spec: &ProblemSpec,
    config: &SolverConfig,
    warm: Option<&[StochasticMatrix]>,
) -> Result<SolveResult> {
    config.validate(spec.num_sources())?;
    let mut runs = Vec::with_capacity(config.restarts + 1);
    if let Some(encoders) = warm {
        check_encoder_shapes(spec, encoders)?;
        let start = initial_state(spec, encoders.to_vec());
        start.validate(spec)?;
        runs.push(run_one(spec, config, start, config.rng_seed));
    }
    for r in 0..config.restarts {
        let seed = config.rng_seed.wrapping_add(r as u64);
        let start = initial_state(spec, initial_encoders(spec, config.init_mode, seed));
        runs.push(run_one(spec, config, start, seed));
    }
    Ok(finish(spec, runs))
}
