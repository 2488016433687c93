//! Closed-form binary Wyner-Ziv rate-distortion function.
//!
//! For `X = Y ⊕ Bern(p)` with Hamming distortion, `R(D)` is the lower convex
//! envelope of `g(D) = h(p ⋆ D) - h(D)` on `[0, p)` together with `(p, 0)`,
//! where `p ⋆ D = p(1 - D) + (1 - p) D`.

use serde::{Deserialize, Serialize};

use super::{OracleError, Result};
use crate::prob::entropy;

/// Sampling step of `g` before taking the hull.
pub const GRID_STEP: f64 = 1e-4;

fn h(p: f64) -> f64 {
    entropy(&[p, 1.0 - p])
}

/// `g(D) = h(p ⋆ D) - h(D)`.
pub fn wz_g(p: f64, d: f64) -> f64 {
    h(p * (1.0 - d) + (1.0 - p) * d) - h(d)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WzCurve {
    pub p: f64,
    /// Hull vertices `(D, R)` in increasing `D`.
    pub points: Vec<(f64, f64)>,
    // grid index of each vertex; `None` for the (p, 0) corner
    #[serde(skip)]
    sample_index: Vec<Option<usize>>,
}

impl WzCurve {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 0.5) {
            return Err(OracleError::OutOfRange(format!("crossover {p} not in (0, 1/2]")));
        }
        let mut samples: Vec<(f64, f64, Option<usize>)> = (0..)
            .map(|k| (k as f64 * GRID_STEP, k))
            .take_while(|&(d, _)| d < p - 1e-12)
            .map(|(d, k)| (d, wz_g(p, d), Some(k)))
            .collect();
        samples.push((p, 0.0, None));

        // lower hull, monotone chain
        let mut hull: Vec<(f64, f64, Option<usize>)> = Vec::new();
        for s in samples {
            while hull.len() >= 2 {
                let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
                let cross = (b.0 - a.0) * (s.1 - a.1) - (b.1 - a.1) * (s.0 - a.0);
                if cross <= 0.0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(s);
        }
        Ok(Self {
            p,
            points: hull.iter().map(|&(d, r, _)| (d, r)).collect(),
            sample_index: hull.iter().map(|&(_, _, k)| k).collect(),
        })
    }

    /// `R(D)` for `0 <= D <= p`.
    pub fn rate(&self, d: f64) -> Result<f64> {
        if !(0.0..=self.p).contains(&d) {
            return Err(OracleError::OutOfRange(format!(
                "distortion {d} not in [0, {}]",
                self.p
            )));
        }
        let k = self
            .points
            .partition_point(|&(x, _)| x <= d)
            .clamp(1, self.points.len() - 1);
        let (a, b) = (self.points[k - 1], self.points[k]);
        if d == a.0 {
            return Ok(a.1);
        }
        match (self.sample_index[k - 1], self.sample_index[k]) {
            // consecutive samples: the envelope follows g itself here
            (Some(i), Some(j)) if j == i + 1 => Ok(wz_g(self.p, d)),
            _ => Ok(a.1 + (b.1 - a.1) * (d - a.0) / (b.0 - a.0)),
        }
    }

    /// Left end of the straight segment ending at `(p, 0)`.
    pub fn critical_distortion(&self) -> f64 {
        self.points[self.points.len() - 2].0
    }
}

/// Binary Wyner-Ziv rate in bits at crossover `p` and distortion `d`.
pub fn wyner_ziv_binary(p: f64, d: f64) -> Result<f64> {
    WzCurve::new(p)?.rate(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corners() {
        assert_eq!(wyner_ziv_binary(0.3, 0.3).unwrap(), 0.0);
        assert!((wyner_ziv_binary(0.3, 0.0).unwrap() - 0.8812908992306927).abs() < 1e-12);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(wyner_ziv_binary(0.3, 0.31).is_err());
        assert!(wyner_ziv_binary(0.0, 0.0).is_err());
        assert!(wyner_ziv_binary(0.6, 0.1).is_err());
    }

    #[test]
    fn midpoint_is_bracketed() {
        let p = 0.3;
        let r = wyner_ziv_binary(p, 0.15).unwrap();
        assert!(r <= wz_g(p, 0.15) + 1e-12);
        // a convex function sits under the chord joining its end points
        let chord = 0.8812908992306927 * (1.0 - 0.15 / p);
        assert!(r <= chord);
        assert!(r > 0.0);
    }

    // Reference values from an analytic tangent construction: the tangent
    // from (p, 0) touches g at d_c ≈ 0.14543356 for p = 0.3.
    #[test]
    fn matches_analytic_tangent() {
        let curve = WzCurve::new(0.3).unwrap();
        assert!((curve.critical_distortion() - 0.14543356).abs() < 2e-4);
        let cases = [
            (0.05, 0.6179845006085375),
            (0.1, 0.45582311138374887),
            (0.15, 0.33273335116729424),
            (0.2, 0.22182223411152946),
            (0.25, 0.11091111705576473),
        ];
        for (d, want) in cases {
            let got = curve.rate(d).unwrap();
            assert!((got - want).abs() < 1e-6, "D = {d}: {got} vs {want}");
        }
    }

    #[test]
    fn convex_and_non_increasing() {
        let curve = WzCurve::new(0.3).unwrap();
        let ds: Vec<f64> = (0..=300).map(|k| k as f64 * 0.001).collect();
        let rs: Vec<f64> = ds.iter().map(|&d| curve.rate(d).unwrap()).collect();
        for w in rs.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
        for w in rs.windows(3) {
            assert!(w[1] <= 0.5 * (w[0] + w[2]) + 1e-9);
        }
    }
}
