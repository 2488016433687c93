use super::reference;
use super::{OracleError, Result};
use crate::prob::StochasticMatrix;
use crate::problem::ProblemSpec;

/// Largest number of encoder configurations enumerated.
pub const MAX_GRID_POINTS: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceMin {
    pub value: f64,
    pub encoders: Vec<StochasticMatrix>,
    pub grid_points: u64,
}

/// All points of the simplex of dimension `k` with coordinates in multiples of `1/n`.
fn simplex_grid(k: usize, n: usize) -> Vec<Vec<f64>> {
    fn rec(k: usize, left: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if k == 1 {
            cur.push(left);
            out.push(cur.iter().map(|&c| c as f64 / n as f64).collect());
            cur.pop();
            return;
        }
        for c in (0..=left).rev() {
            cur.push(c);
            rec(k - 1, left - c, n, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(k, n, n, &mut Vec::new(), &mut out);
    out
}

/// Minimizes the Lagrangian over a grid of encoder channels.
///
/// Each encoder row ranges over the simplex with step `resolution`; for every
/// grid point the marginals and decoder take their exact optimal responses
/// (induced marginal, Bayes detector), evaluated by full-index sums.
pub fn brute_force_lagrangian_min(spec: &ProblemSpec, lambda: f64, resolution: f64) -> Result<BruteForceMin> {
    if !(resolution > 0.0 && resolution <= 1.0) {
        return Err(OracleError::InvalidResolution(resolution));
    }
    let n = (1.0 / resolution).round() as usize;
    if ((n as f64) * resolution - 1.0).abs() > 1e-9 {
        return Err(OracleError::InvalidResolution(resolution));
    }
    let m = spec.num_sources();
    let row_grids: Vec<Vec<Vec<f64>>> = spec.aux_sizes().iter().map(|&w| simplex_grid(w, n)).collect();
    // one digit per encoder row
    let mut radix = Vec::new();
    let mut owner = Vec::new();
    for i in 0..m {
        for _ in 0..spec.source_sizes()[i] {
            radix.push(row_grids[i].len());
            owner.push(i);
        }
    }
    let total = radix
        .iter()
        .try_fold(1u64, |acc, &r| acc.checked_mul(r as u64))
        .filter(|&t| t <= MAX_GRID_POINTS)
        .ok_or(OracleError::GridTooLarge {
            limit: MAX_GRID_POINTS,
        })?;

    let mut digits = vec![0usize; radix.len()];
    let mut best: Option<(f64, Vec<StochasticMatrix>)> = None;
    let mut evaluated = 0u64;
    loop {
        let mut rows: Vec<Vec<f64>> = vec![Vec::new(); m];
        for (d, &i) in digits.iter().zip(&owner) {
            rows[i].extend_from_slice(&row_grids[i][*d]);
        }
        let encoders: Vec<StochasticMatrix> = rows
            .into_iter()
            .enumerate()
            .map(|(i, probs)| {
                StochasticMatrix::new_unchecked(spec.source_sizes()[i], spec.aux_sizes()[i], probs)
            })
            .collect();
        let marginals: Vec<StochasticMatrix> = (0..m)
            .map(|i| reference::induced_marginal(spec, &encoders, i))
            .collect();
        let decoder = reference::bayes_decoder(spec, &encoders);
        let value = reference::lagrangian(spec, &encoders, &marginals, &decoder, lambda);
        evaluated += 1;
        if best.as_ref().is_none_or(|(b, _)| value < *b) {
            best = Some((value, encoders));
        }
        if !crate::tensor::increment(&mut digits, &radix) {
            break;
        }
    }
    debug_assert_eq!(evaluated, total);
    let (value, encoders) = best.expect("grid is nonempty");
    Ok(BruteForceMin {
        value,
        encoders,
        grid_points: evaluated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn simplex_grid_counts() {
        assert_eq!(simplex_grid(2, 2).len(), 3);
        assert_eq!(simplex_grid(3, 2).len(), 6);
        assert_eq!(simplex_grid(2, 50).len(), 51);
        for p in simplex_grid(3, 4) {
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn half_resolution_on_binary_channel() {
        let spec = catalog::wz_binary(0.3).unwrap().with_aux_sizes(vec![2]).unwrap();
        let r = brute_force_lagrangian_min(&spec, 1.0, 0.5).unwrap();
        assert_eq!(r.grid_points, 9);
    }

    #[test]
    fn zero_lambda_minimum_is_zero() {
        let spec = catalog::wz_binary(0.3).unwrap().with_aux_sizes(vec![2]).unwrap();
        let r = brute_force_lagrangian_min(&spec, 0.0, 0.1).unwrap();
        assert!(r.value.abs() < 1e-15);
    }

    #[test]
    fn grid_limits() {
        let spec = catalog::two_bsc(0.3, 0.3).unwrap();
        assert!(matches!(
            brute_force_lagrangian_min(&spec, 1.0, 0.01),
            Err(OracleError::GridTooLarge { .. })
        ));
        assert!(matches!(
            brute_force_lagrangian_min(&spec, 1.0, 0.3),
            Err(OracleError::InvalidResolution(_))
        ));
    }
}
