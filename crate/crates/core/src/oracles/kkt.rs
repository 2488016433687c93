use super::reference;
use crate::problem::ProblemSpec;
use crate::solver::{SolverState, LOG_FLOOR};

/// Entries of `q_m(.|x)` above this count as active (strictly positive).
pub const ACTIVE_THRESHOLD: f64 = 1e-8;

/// Partial derivatives of the Lagrangian with respect to each `q_m(w|x)`,
/// row-major over `(x, w)`, holding `Q`, the decoder and the other encoders
/// fixed:
///
/// `dL/dq(w|x) = weight * sum_y p(x,y) (log2 q(w|x) - log2 Q(w|y) + 1/ln 2) + lambda C(w,x)`.
pub fn encoder_gradient(spec: &ProblemSpec, state: &SolverState, m: usize, lambda: f64, weight: f64) -> Vec<f64> {
    let cost = reference::encoder_cost(spec, &state.encoders, &state.decoder, m);
    let pxy = spec.source_side_joint(m);
    let (q, big_q) = (&state.encoders[m], &state.marginals[m]);
    let (nx, ny, nw) = (q.rows(), spec.y_size(), q.cols());
    let mut grad = vec![0.0; nx * nw];
    for x in 0..nx {
        for w in 0..nw {
            let log_q = q.get(x, w).max(LOG_FLOOR).log2();
            let rate: f64 = (0..ny)
                .map(|y| {
                    let p = pxy.probs()[x * ny + y];
                    p * (log_q - big_q.get(y, w).max(LOG_FLOOR).log2() + std::f64::consts::LOG2_E)
                })
                .sum();
            grad[x * nw + w] = weight * rate + lambda * cost[x * nw + w];
        }
    }
    grad
}

/// Stationarity residual of the encoder blocks, with per-source rate weights.
pub fn kkt_residual_weighted(spec: &ProblemSpec, state: &SolverState, lambda: f64, weights: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for m in 0..spec.num_sources() {
        let grad = encoder_gradient(spec, state, m, lambda, weights[m]);
        let q = &state.encoders[m];
        let pxy = spec.source_side_joint(m);
        let ny = spec.y_size();
        for x in 0..q.rows() {
            let px: f64 = pxy.probs()[x * ny..(x + 1) * ny].iter().sum();
            if px <= 0.0 {
                continue;
            }
            let row = &grad[x * q.cols()..(x + 1) * q.cols()];
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for (w, &g) in row.iter().enumerate() {
                if q.get(x, w) > ACTIVE_THRESHOLD {
                    lo = lo.min(g);
                    hi = hi.max(g);
                }
            }
            // a minimizer needs inactive partials at or above the active level
            let violation = row
                .iter()
                .enumerate()
                .filter(|&(w, _)| q.get(x, w) <= ACTIVE_THRESHOLD)
                .map(|(_, &g)| (lo - g).max(0.0))
                .fold(0.0, f64::max);
            worst = worst.max(hi - lo + violation);
        }
    }
    worst
}

/// Largest spread of `dL/dq_m(w|x)` over the support of `q_m(.|x)`, plus the
/// largest violation of the complementary condition on zero entries, over all
/// users and source symbols.
pub fn kkt_residual(spec: &ProblemSpec, state: &SolverState, lambda: f64) -> f64 {
    kkt_residual_weighted(spec, state, lambda, &vec![1.0; spec.num_sources()])
}
