//! Nested-loop evaluations over the full `(t, x, y, w, t_hat)` index space.
//!
//! These deliberately avoid the solver's tensor contractions so they can be
//! used to check them.

use crate::prob::{for_each_index, StochasticMatrix};
use crate::problem::ProblemSpec;
use crate::solver::Decoder;

fn floored_log2(v: f64) -> f64 {
    v.max(crate::solver::LOG_FLOOR).log2()
}

struct Layout {
    m: usize,
    xs: Vec<usize>,
    ws: Vec<usize>,
    ny: usize,
    nt: usize,
    nt_hat: usize,
}

impl Layout {
    fn new(spec: &ProblemSpec) -> Self {
        Self {
            m: spec.num_sources(),
            xs: spec.source_sizes().to_vec(),
            ws: spec.aux_sizes().to_vec(),
            ny: spec.y_size(),
            nt: spec.t_size(),
            nt_hat: spec.t_hat_size(),
        }
    }

    fn w_flat(&self, w: &[usize]) -> usize {
        w.iter().zip(&self.ws).fold(0, |acc, (&wi, &n)| acc * n + wi)
    }

    /// Shape of the `(t, x_1.., x_M, y, w_1.., w_M)` index space.
    fn source_aux_shape(&self) -> Vec<usize> {
        let mut s = vec![self.nt];
        s.extend(&self.xs);
        s.push(self.ny);
        s.extend(&self.ws);
        s
    }
}

fn joint_at(spec: &ProblemSpec, t: usize, x: &[usize], y: usize) -> f64 {
    let mut idx = Vec::with_capacity(x.len() + 2);
    idx.push(t);
    idx.extend_from_slice(x);
    idx.push(y);
    spec.joint().get(&idx)
}

/// `Q_i(w|y) = sum_{t,x} p(t,x,y) q_i(w|x_i) / p(y)`, uniform where `p(y) = 0`.
pub fn induced_marginal(spec: &ProblemSpec, encoders: &[StochasticMatrix], i: usize) -> StochasticMatrix {
    let l = Layout::new(spec);
    let nw = l.ws[i];
    let mut num = vec![0.0; l.ny * nw];
    let mut shape = vec![l.nt];
    shape.extend(&l.xs);
    shape.push(l.ny);
    for_each_index(&shape, |idx| {
        let p = spec.joint().get(idx);
        let y = idx[l.m + 1];
        for w in 0..nw {
            num[y * nw + w] += p * encoders[i].get(idx[i + 1], w);
        }
    });
    for y in 0..l.ny {
        let row = &mut num[y * nw..(y + 1) * nw];
        let s: f64 = row.iter().sum();
        if s > 0.0 {
            row.iter_mut().for_each(|v| *v /= s);
        } else {
            row.iter_mut().for_each(|v| *v = 1.0 / nw as f64);
        }
    }
    StochasticMatrix::new_unchecked(l.ny, nw, num)
}

/// Bayes decoder by explicit risk enumeration (lowest index on ties).
pub fn bayes_decoder(spec: &ProblemSpec, encoders: &[StochasticMatrix]) -> Decoder {
    let l = Layout::new(spec);
    let n_wy = l.ws.iter().product::<usize>() * l.ny;
    let mut risk = vec![0.0; n_wy * l.nt_hat];
    for_each_index(&l.source_aux_shape(), |idx| {
        let t = idx[0];
        let x = &idx[1..=l.m];
        let y = idx[l.m + 1];
        let w = &idx[l.m + 2..];
        let weight = joint_at(spec, t, x, y)
            * (0..l.m).map(|i| encoders[i].get(x[i], w[i])).product::<f64>();
        if weight == 0.0 {
            return;
        }
        let s = l.w_flat(w) * l.ny + y;
        for t_hat in 0..l.nt_hat {
            risk[s * l.nt_hat + t_hat] += weight * spec.distortion().get(t, t_hat);
        }
    });
    let choices: Vec<usize> = (0..n_wy)
        .map(|s| {
            let r = &risk[s * l.nt_hat..(s + 1) * l.nt_hat];
            let mut best = 0;
            for (k, &v) in r.iter().enumerate() {
                if v < r[best] {
                    best = k;
                }
            }
            best
        })
        .collect();
    Decoder::deterministic(l.ws.clone(), l.ny, l.nt_hat, &choices)
}

/// Full-sum evaluation of the Lagrangian term by term, with per-source rate
/// weights. Returns `(weighted rate sum, expected distortion)`.
pub fn lagrangian_parts(
    spec: &ProblemSpec,
    encoders: &[StochasticMatrix],
    marginals: &[StochasticMatrix],
    decoder: &Decoder,
    weights: &[f64],
) -> (f64, f64) {
    let l = Layout::new(spec);
    let mut rate = 0.0;
    let mut dist = 0.0;
    for_each_index(&l.source_aux_shape(), |idx| {
        let t = idx[0];
        let x = &idx[1..=l.m];
        let y = idx[l.m + 1];
        let w = &idx[l.m + 2..];
        let base = joint_at(spec, t, x, y)
            * (0..l.m).map(|i| encoders[i].get(x[i], w[i])).product::<f64>();
        if base == 0.0 {
            return;
        }
        let log_ratio: f64 = (0..l.m)
            .map(|i| {
                let q = encoders[i].get(x[i], w[i]);
                weights[i] * (q.log2() - floored_log2(marginals[i].get(y, w[i])))
            })
            .sum();
        let wf = l.w_flat(w);
        for t_hat in 0..l.nt_hat {
            let dec = decoder.get(wf, y, t_hat);
            if dec == 0.0 {
                continue;
            }
            rate += base * dec * log_ratio;
            dist += base * dec * spec.distortion().get(t, t_hat);
        }
    });
    (rate, dist)
}

/// Full-sum Lagrangian with unit rate weights.
pub fn lagrangian(
    spec: &ProblemSpec,
    encoders: &[StochasticMatrix],
    marginals: &[StochasticMatrix],
    decoder: &Decoder,
    lambda: f64,
) -> f64 {
    let (rate, dist) = lagrangian_parts(
        spec,
        encoders,
        marginals,
        decoder,
        &vec![1.0; spec.num_sources()],
    );
    rate + lambda * dist
}

/// Full-sum expected distortion.
pub fn expected_distortion(spec: &ProblemSpec, encoders: &[StochasticMatrix], decoder: &Decoder) -> f64 {
    let marginals: Vec<StochasticMatrix> = (0..spec.num_sources())
        .map(|i| induced_marginal(spec, encoders, i))
        .collect();
    lagrangian_parts(spec, encoders, &marginals, decoder, &vec![0.0; spec.num_sources()]).1
}

/// `C(w_m, x_m)`: expected distortion mass attached to `q_m(w_m | x_m)`,
/// row-major over `(x_m, w_m)`.
pub fn encoder_cost(spec: &ProblemSpec, encoders: &[StochasticMatrix], decoder: &Decoder, m: usize) -> Vec<f64> {
    let l = Layout::new(spec);
    let nw = l.ws[m];
    let mut cost = vec![0.0; l.xs[m] * nw];
    for_each_index(&l.source_aux_shape(), |idx| {
        let t = idx[0];
        let x = &idx[1..=l.m];
        let y = idx[l.m + 1];
        let w = &idx[l.m + 2..];
        let others: f64 = (0..l.m)
            .filter(|&i| i != m)
            .map(|i| encoders[i].get(x[i], w[i]))
            .product();
        let base = joint_at(spec, t, x, y) * others;
        if base == 0.0 {
            return;
        }
        let wf = l.w_flat(w);
        let d: f64 = (0..l.nt_hat)
            .map(|t_hat| decoder.get(wf, y, t_hat) * spec.distortion().get(t, t_hat))
            .sum();
        cost[x[m] * nw + w[m]] += base * d;
    });
    cost
}
