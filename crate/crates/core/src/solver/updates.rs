use super::state::{Decoder, SolverState};
use crate::prob::StochasticMatrix;
use crate::problem::ProblemSpec;
use crate::tensor::Tensor;

/// `log2` of marginal entries is floored at `log2(1e-300)`.
pub const LOG_FLOOR: f64 = 1e-300;

fn floored_log2(v: f64) -> f64 {
    v.max(LOG_FLOOR).log2()
}

/// Joint tensor with every source axis except `skip` mapped through its
/// encoder: axes `(t, w_1.., x_skip, .., w_M, y)`.
fn push_through_encoders(spec: &ProblemSpec, encoders: &[StochasticMatrix], skip: Option<usize>) -> Tensor {
    let mut t = spec.joint().to_tensor();
    for (i, q) in encoders.iter().enumerate() {
        if Some(i) != skip {
            t = t.mode_product(i + 1, q.probs(), q.cols());
        }
    }
    t
}

/// Bayes risk `J(t_hat, w, y) = sum_{t,x} d(t,t_hat) p(t,x,y) prod_i q_i(w_i|x_i)`,
/// laid out `(t_hat, w_1.., w_M, y)`.
fn bayes_risk(spec: &ProblemSpec, encoders: &[StochasticMatrix]) -> Tensor {
    let d = spec.distortion();
    push_through_encoders(spec, encoders, None).mode_product(0, d.values(), d.cols())
}

/// Rate term of each source, `sum p(y,x_i) q_i log2(q_i / Q_i)`, using the
/// state's marginals as given (no clamping).
pub fn rate_terms(spec: &ProblemSpec, state: &SolverState) -> Vec<f64> {
    (0..spec.num_sources())
        .map(|i| {
            let pxy = spec.source_side_joint(i);
            let ny = spec.y_size();
            let (q, big_q) = (&state.encoders[i], &state.marginals[i]);
            let mut total = 0.0;
            for x in 0..q.rows() {
                for y in 0..ny {
                    let p = pxy.probs()[x * ny + y];
                    if p == 0.0 {
                        continue;
                    }
                    for w in 0..q.cols() {
                        let qw = q.get(x, w);
                        if qw > 0.0 {
                            total += p * qw * (qw.log2() - floored_log2(big_q.get(y, w)));
                        }
                    }
                }
            }
            total
        })
        .collect()
}

/// Expected distortion `E[d(T, T_hat)]` under the state's encoders and decoder.
pub fn expected_distortion(spec: &ProblemSpec, state: &SolverState) -> f64 {
    let risk = bayes_risk(spec, &state.encoders);
    let n_t_hat = spec.t_hat_size();
    let n_slices = risk.len() / n_t_hat;
    let dec = state.decoder.probs();
    let mut total = 0.0;
    for t_hat in 0..n_t_hat {
        for s in 0..n_slices {
            total += risk.data[t_hat * n_slices + s] * dec[s * n_t_hat + t_hat];
        }
    }
    total
}

/// Lagrangian with rate terms weighted per source.
pub fn weighted_lagrangian(spec: &ProblemSpec, state: &SolverState, lambda: f64, weights: &[f64]) -> f64 {
    let rate: f64 = rate_terms(spec, state)
        .iter()
        .zip(weights)
        .map(|(r, w)| r * w)
        .sum();
    rate + lambda * expected_distortion(spec, state)
}

/// Lagrangian `sum_i R_i(q_i, Q_i) + lambda * E[d]`.
pub fn lagrangian(spec: &ProblemSpec, state: &SolverState, lambda: f64) -> f64 {
    weighted_lagrangian(spec, state, lambda, &vec![1.0; spec.num_sources()])
}

/// Result of a marginal update.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalUpdate {
    pub channel: StochasticMatrix,
    /// Side-information symbols with zero probability, filled uniformly.
    pub degenerate_rows: Vec<usize>,
}

/// Minimizer of the Lagrangian over `Q_m` with everything else fixed.
///
/// The decoder and the other users' channels sum out of the weighting, which
/// leaves the marginal of `w_m` given `y` induced by `q_m`.
pub fn update_marginal(spec: &ProblemSpec, state: &SolverState, m: usize) -> MarginalUpdate {
    let pxy = spec.source_side_joint(m);
    let q = &state.encoders[m];
    let (nx, ny, nw) = (q.rows(), spec.y_size(), q.cols());
    let mut probs = vec![0.0; ny * nw];
    let mut degenerate_rows = Vec::new();
    for y in 0..ny {
        let row = &mut probs[y * nw..(y + 1) * nw];
        for x in 0..nx {
            let p = pxy.probs()[x * ny + y];
            if p == 0.0 {
                continue;
            }
            for (w, r) in row.iter_mut().enumerate() {
                *r += p * q.get(x, w);
            }
        }
        let mass: f64 = row.iter().sum();
        if mass > 0.0 {
            row.iter_mut().for_each(|v| *v /= mass);
        } else {
            row.iter_mut().for_each(|v| *v = 1.0 / nw as f64);
            degenerate_rows.push(y);
        }
    }
    MarginalUpdate {
        channel: StochasticMatrix::new_unchecked(ny, nw, probs),
        degenerate_rows,
    }
}

/// Expected distortion contributed by each `(w_m, x_m)` pair with the decoder
/// and the other encoders held fixed:
/// `C(w_m, x_m) = sum_{w\m, x\m, t, t_hat, y} d p(t,x,y) q'(t_hat|w,y) prod_{i!=m} q_i`.
///
/// Returned row-major over `(x_m, w_m)`. `E[d] = sum q_m(w_m|x_m) C(w_m, x_m)`.
pub fn encoder_cost(spec: &ProblemSpec, state: &SolverState, m: usize) -> Vec<f64> {
    let d = spec.distortion();
    let (n_t, n_t_hat) = (d.rows(), d.cols());
    let n_slices = state.decoder.num_slices();
    // B(t, w, y) = sum_t_hat d(t, t_hat) q'(t_hat | w, y)
    let dec = state.decoder.probs();
    let mut b = vec![0.0; n_t * n_slices];
    for t in 0..n_t {
        let d_row = &d.values()[t * n_t_hat..(t + 1) * n_t_hat];
        for s in 0..n_slices {
            b[t * n_slices + s] = d_row
                .iter()
                .zip(&dec[s * n_t_hat..(s + 1) * n_t_hat])
                .map(|(a, c)| a * c)
                .sum();
        }
    }
    let partial = push_through_encoders(spec, &state.encoders, Some(m));
    let (outer, nx, inner) = partial.split_at_axis(m + 1);
    let nw = spec.aux_sizes()[m];
    let mut cost = vec![0.0; nx * nw];
    for o in 0..outer {
        for x in 0..nx {
            let p = &partial.data[(o * nx + x) * inner..(o * nx + x + 1) * inner];
            for w in 0..nw {
                let bw = &b[(o * nw + w) * inner..(o * nw + w + 1) * inner];
                cost[x * nw + w] += p.iter().zip(bw).map(|(a, c)| a * c).sum::<f64>();
            }
        }
    }
    cost
}

/// Minimizer of the Lagrangian over `q_m` with `Q`, the decoder and the other
/// encoders fixed:
///
/// `q(w|x) ∝ 2^( sum_y p(y|x) log2 Q_m(w|y) - lambda C(w,x) / p(x) )`.
///
/// Computed with max-subtraction in the exponent. Rows with `p(x) = 0` do not
/// enter the objective and are set uniform.
pub fn update_encoder(spec: &ProblemSpec, state: &SolverState, m: usize, lambda: f64) -> StochasticMatrix {
    let pxy = spec.source_side_joint(m);
    let cost = encoder_cost(spec, state, m);
    let big_q = &state.marginals[m];
    let (nx, ny, nw) = (spec.source_sizes()[m], spec.y_size(), spec.aux_sizes()[m]);
    let mut out = StochasticMatrix::uniform(nx, nw);
    let mut exponent = vec![0.0; nw];
    for x in 0..nx {
        let px: f64 = pxy.probs()[x * ny..(x + 1) * ny].iter().sum();
        if px <= 0.0 {
            continue;
        }
        for (w, e) in exponent.iter_mut().enumerate() {
            let side: f64 = (0..ny)
                .map(|y| {
                    let pyx = pxy.probs()[x * ny + y] / px;
                    if pyx == 0.0 {
                        0.0
                    } else {
                        pyx * floored_log2(big_q.get(y, w))
                    }
                })
                .sum();
            *e = side - lambda * cost[x * nw + w] / px;
        }
        let top = exponent.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let row = out.row_mut(x);
        for (r, e) in row.iter_mut().zip(&exponent) {
            *r = (e - top).exp2();
        }
        let z: f64 = row.iter().sum();
        row.iter_mut().for_each(|v| *v /= z);
    }
    out
}

/// Bayes detector: every `(w, y)` slice puts all mass on the reconstruction
/// with minimum risk, lowest index on ties.
pub fn update_decoder(spec: &ProblemSpec, state: &SolverState) -> Decoder {
    let risk = bayes_risk(spec, &state.encoders);
    let n_t_hat = spec.t_hat_size();
    let n_slices = risk.len() / n_t_hat;
    let choices: Vec<usize> = (0..n_slices)
        .map(|s| {
            let mut best = 0;
            for t_hat in 1..n_t_hat {
                if risk.data[t_hat * n_slices + s] < risk.data[best * n_slices + s] {
                    best = t_hat;
                }
            }
            best
        })
        .collect();
    Decoder::deterministic(spec.aux_sizes().to_vec(), spec.y_size(), n_t_hat, &choices)
}

/// Per-source rates `R_i = sum p(y,x_i) q_i log2(q_i / Q_i)` in bits.
///
/// Meaningful when each `Q_i` is the marginal induced by `q_i`. Values within
/// `1e-9` below zero are clamped to zero.
pub fn rates(spec: &ProblemSpec, state: &SolverState) -> Vec<f64> {
    rate_terms(spec, state)
        .into_iter()
        .map(|r| if (-1e-9..0.0).contains(&r) { 0.0 } else { r })
        .collect()
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::catalog;
    use crate::oracles::reference;
    use crate::prob::binary_entropy;
    use crate::solver::initial_state;

    fn random_channel(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> StochasticMatrix {
        let rows: Vec<Vec<f64>> = (0..rows)
            .map(|_| {
                let r: Vec<f64> = (0..cols).map(|_| rng.random::<f64>() + 0.05).collect();
                let z: f64 = r.iter().sum();
                r.into_iter().map(|v| v / z).collect()
            })
            .collect();
        StochasticMatrix::from_rows(&rows).unwrap()
    }

    /// Random encoders and unrelated random marginals; decoder is Bayes.
    fn random_state(spec: &ProblemSpec, seed: u64) -> SolverState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let enc = (0..spec.num_sources())
            .map(|i| random_channel(&mut rng, spec.source_sizes()[i], spec.aux_sizes()[i]))
            .collect();
        let mut s = initial_state(spec, enc);
        for i in 0..spec.num_sources() {
            s.marginals[i] = random_channel(&mut rng, spec.y_size(), spec.aux_sizes()[i]);
        }
        s
    }

    fn h03() -> f64 {
        binary_entropy(0.3).unwrap()
    }

    #[test]
    fn identity_encoders_lagrangian() {
        let spec = catalog::two_bsc(0.3, 0.3).unwrap().with_aux_sizes(vec![2, 2]).unwrap();
        let s = initial_state(&spec, vec![StochasticMatrix::identity(2, 2); 2]);
        assert_eq!(expected_distortion(&spec, &s), 0.0);
        assert!((lagrangian(&spec, &s, 1.0) - 1.7625817984613854).abs() < 1e-12);
        assert!((lagrangian(&spec, &s, 1.0) - 2.0 * h03()).abs() < 1e-12);
        for r in rates(&spec, &s) {
            assert!((r - 0.8812908992306927).abs() < 1e-12);
        }
        // pass-through decoder: t_hat = (w_1, w_2)
        for w1 in 0..2 {
            for w2 in 0..2 {
                for y in 0..2 {
                    assert_eq!(s.decoder.get(w1 * 2 + w2, y, w1 * 2 + w2), 1.0);
                }
            }
        }
    }

    #[test]
    fn zero_rate_configuration() {
        let spec = catalog::two_bsc(0.3, 0.3).unwrap();
        let enc = vec![StochasticMatrix::constant(2, &[0.5, 0.3, 0.2]).unwrap(); 2];
        let s = initial_state(&spec, enc);
        assert!((expected_distortion(&spec, &s) - 0.6).abs() < 1e-12);
        for r in rates(&spec, &s) {
            assert!(r.abs() < 1e-15);
        }
        assert!((lagrangian(&spec, &s, 2.0) - 1.2).abs() < 1e-12);
        // t_hat = (y, y): index 0 for y = 0, index 3 for y = 1
        for wf in 0..9 {
            assert_eq!(s.decoder.get(wf, 0, 0), 1.0);
            assert_eq!(s.decoder.get(wf, 1, 3), 1.0);
        }
    }

    #[test]
    fn singleton_aux_marginal() {
        let spec = catalog::wz_binary(0.3).unwrap().with_aux_sizes(vec![1]).unwrap();
        let s = initial_state(&spec, vec![StochasticMatrix::uniform(2, 1)]);
        let u = update_marginal(&spec, &s, 0);
        assert_eq!(u.channel.probs(), &[1.0, 1.0]);
        assert!(u.degenerate_rows.is_empty());
    }

    #[test]
    fn constant_encoder_marginal() {
        let spec = catalog::two_bsc(0.3, 0.3).unwrap();
        let r = [0.2, 0.5, 0.3];
        let s = initial_state(&spec, vec![StochasticMatrix::constant(2, &r).unwrap(); 2]);
        let q = update_marginal(&spec, &s, 1).channel;
        for y in 0..2 {
            for w in 0..3 {
                assert!((q.get(y, w) - r[w]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn zero_mass_side_symbol_is_flagged() {
        // y = 1 never occurs
        let joint = crate::prob::JointPmf::new(vec![2, 2, 2], vec![0.4, 0.0, 0.0, 0.0, 0.0, 0.0, 0.6, 0.0]).unwrap();
        let spec = ProblemSpec::new("dead", joint, crate::prob::DistortionMatrix::hamming(2), None).unwrap();
        let s = initial_state(&spec, vec![StochasticMatrix::identity(2, 3)]);
        let u = update_marginal(&spec, &s, 0);
        assert_eq!(u.degenerate_rows, vec![1]);
        assert_eq!(u.channel.row(1), &[1.0 / 3.0; 3]);
    }

    #[test]
    fn matches_reference_evaluations() {
        for (spec, seed) in [
            (catalog::two_bsc(0.3, 0.3).unwrap(), 1),
            (catalog::dependent_pair().unwrap(), 2),
            (catalog::wz_binary(0.2).unwrap(), 3),
        ] {
            let s = random_state(&spec, seed);
            let reference_l = reference::lagrangian(&spec, &s.encoders, &s.marginals, &s.decoder, 1.7);
            assert!((lagrangian(&spec, &s, 1.7) - reference_l).abs() < 1e-12);
            let d = reference::expected_distortion(&spec, &s.encoders, &s.decoder);
            assert!((expected_distortion(&spec, &s) - d).abs() < 1e-12);
            for m in 0..spec.num_sources() {
                let q = update_marginal(&spec, &s, m).channel;
                let r = reference::induced_marginal(&spec, &s.encoders, m);
                assert!(q.max_abs_diff(&r) < 1e-12);
                let c = encoder_cost(&spec, &s, m);
                let rc = reference::encoder_cost(&spec, &s.encoders, &s.decoder, m);
                for (a, b) in c.iter().zip(&rc) {
                    assert!((a - b).abs() < 1e-12);
                }
            }
            assert_eq!(update_decoder(&spec, &s), reference::bayes_decoder(&spec, &s.encoders));
        }
    }

    #[test]
    fn lambda_zero_uniform_marginal_gives_uniform_encoder() {
        let spec = catalog::two_bsc(0.3, 0.3).unwrap();
        let mut s = random_state(&spec, 4);
        s.marginals[0] = StochasticMatrix::uniform(2, 3);
        let q = update_encoder(&spec, &s, 0, 0.0);
        assert!(q.max_abs_diff(&StochasticMatrix::uniform(2, 3)) < 1e-15);
    }

    #[test]
    fn lambda_zero_is_geometric_mean() {
        let spec = catalog::two_bsc(0.2, 0.35).unwrap();
        let s = random_state(&spec, 5);
        let q = update_encoder(&spec, &s, 1, 0.0);
        let pxy = spec.source_side_joint(1);
        for x in 0..2 {
            let px = pxy.get(&[x, 0]) + pxy.get(&[x, 1]);
            let g: Vec<f64> = (0..3)
                .map(|w| {
                    (0..2)
                        .map(|y| s.marginals[1].get(y, w).powf(pxy.get(&[x, y]) / px))
                        .product()
                })
                .collect();
            let z: f64 = g.iter().sum();
            for w in 0..3 {
                assert!((q.get(x, w) - g[w] / z).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn each_update_does_not_increase_lagrangian() {
        let spec = catalog::two_bsc(0.3, 0.3).unwrap();
        let lambda = 2.5;
        let mut s = random_state(&spec, 6);
        let mut prev = lagrangian(&spec, &s, lambda);
        for _ in 0..5 {
            for m in 0..2 {
                s.marginals[m] = update_marginal(&spec, &s, m).channel;
                let l = lagrangian(&spec, &s, lambda);
                assert!(l <= prev + 1e-12);
                prev = l;
                s.encoders[m] = update_encoder(&spec, &s, m, lambda);
                let l = lagrangian(&spec, &s, lambda);
                assert!(l <= prev + 1e-12);
                prev = l;
                s.decoder = update_decoder(&spec, &s);
                let l = lagrangian(&spec, &s, lambda);
                assert!(l <= prev + 1e-12);
                prev = l;
            }
        }
    }

    #[test]
    fn ties_go_to_lowest_index() {
        // X independent of Y and uniform: both reconstructions have equal risk
        let spec = catalog::wz_binary(0.5).unwrap();
        let s = initial_state(&spec, vec![StochasticMatrix::uniform(2, 3)]);
        for slice in 0..s.decoder.num_slices() {
            assert_eq!(s.decoder.slice(slice), &[1.0, 0.0]);
        }
    }

    #[test]
    fn scaling_distortion_and_lambda_cancels() {
        let spec = catalog::two_bsc(0.3, 0.3).unwrap();
        let scaled = ProblemSpec::new(
            "scaled",
            spec.joint().clone(),
            spec.distortion().scaled(4.0).unwrap(),
            None,
        )
        .unwrap();
        let s = random_state(&spec, 7);
        for m in 0..2 {
            let a = update_encoder(&spec, &s, m, 3.0);
            let b = update_encoder(&scaled, &s, m, 0.75);
            assert!(a.max_abs_diff(&b) < 1e-14);
        }
    }

    #[test]
    fn weighted_lagrangian_matches_reference() {
        let spec = catalog::two_bsc(0.3, 0.1).unwrap();
        let s = random_state(&spec, 8);
        let w = [0.5, 3.0];
        let (rate, dist) = reference::lagrangian_parts(&spec, &s.encoders, &s.marginals, &s.decoder, &w);
        assert!((weighted_lagrangian(&spec, &s, 1.3, &w) - (rate + 1.3 * dist)).abs() < 1e-12);
    }
}
