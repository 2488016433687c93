//! Constructors for the standard binary instances.

use crate::prob::{DistortionMatrix, JointPmf, ProbError};
use crate::problem::ProblemSpec;

/// `p(x | y)` of a binary symmetric channel, rows indexed by `y`.
fn bsc(p: f64) -> [[f64; 2]; 2] {
    [[1.0 - p, p], [p, 1.0 - p]]
}

/// Uniform binary `Y` observed by `M` encoders through independent BSCs with
/// the given crossovers; `T = (X_1, .., X_M)` under Hamming-sum distortion.
pub fn bsc_sources(name: &str, crossovers: &[f64]) -> Result<ProblemSpec, ProbError> {
    let m = crossovers.len();
    let n_x = 1usize << m;
    // axes (t, x_1.., x_M, y) with t the mixed-radix index of x
    let mut probs = vec![0.0; n_x * n_x * 2];
    let mut bits = vec![0usize; m];
    for x in 0..n_x {
        crate::tensor::unravel(x, &vec![2; m], &mut bits);
        for y in 0..2 {
            let p: f64 = 0.5
                * bits
                    .iter()
                    .zip(crossovers)
                    .map(|(&b, &c)| bsc(c)[y][b])
                    .product::<f64>();
            probs[(x * n_x + x) * 2 + y] = p;
        }
    }
    let shape: Vec<usize> = std::iter::once(n_x)
        .chain(std::iter::repeat_n(2, m))
        .chain(std::iter::once(2))
        .collect();
    ProblemSpec::new(
        name,
        JointPmf::new(shape, probs)?,
        DistortionMatrix::hamming_sum(&vec![2; m]),
        None,
    )
}

/// The two-encoder example: crossovers `p1`, `p2`, `|W_i| = 3`.
pub fn two_bsc(p1: f64, p2: f64) -> Result<ProblemSpec, ProbError> {
    bsc_sources("two_bsc", &[p1, p2])
}

/// Binary Wyner-Ziv: `X = Y ⊕ Bern(p)`, `T = X`, Hamming distortion.
pub fn wz_binary(p: f64) -> Result<ProblemSpec, ProbError> {
    bsc_sources("wz_binary", &[p])
}

/// Two sources that are dependent given `Y`: `X_1 = Y ⊕ Bern(0.2)`,
/// `X_2 = X_1 ⊕ Bern(0.1)`, `T = (X_1, X_2)` under Hamming-sum distortion.
pub fn dependent_pair() -> Result<ProblemSpec, ProbError> {
    let mut probs = vec![0.0; 4 * 2 * 2 * 2];
    for x1 in 0..2 {
        for x2 in 0..2 {
            for y in 0..2 {
                let p = 0.5 * bsc(0.2)[y][x1] * bsc(0.1)[x1][x2];
                let t = x1 * 2 + x2;
                probs[((t * 2 + x1) * 2 + x2) * 2 + y] = p;
            }
        }
    }
    ProblemSpec::new(
        "dependent_pair",
        JointPmf::new(vec![4, 2, 2, 2], probs)?,
        DistortionMatrix::hamming_sum(&[2, 2]),
        None,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::{check_conditional_independence, conditional, conditional_mutual_information, marginal};

    #[test]
    fn two_bsc_entries() {
        let spec = two_bsc(0.3, 0.3).unwrap();
        assert_eq!(spec.joint().shape(), &[4, 2, 2, 2]);
        assert!((spec.joint().get(&[0, 0, 0, 0]) - 0.245).abs() < 1e-15);
        assert_eq!(spec.aux_sizes(), &[3, 3]);
        let x1y = marginal(spec.joint(), &[1, 3]).unwrap();
        assert!((x1y.probs()[0] - 0.35).abs() < 1e-15);
        assert!((x1y.probs()[1] - 0.15).abs() < 1e-15);
        assert!((x1y.probs()[2] - 0.15).abs() < 1e-15);
        assert!((x1y.probs()[3] - 0.35).abs() < 1e-15);
    }

    #[test]
    fn two_bsc_conditionals_and_independence() {
        let spec = two_bsc(0.3, 0.3).unwrap();
        let c = conditional(spec.joint(), &[1], &[3]).unwrap();
        assert!((c.row(0)[0] - 0.7).abs() < 1e-15 && (c.row(0)[1] - 0.3).abs() < 1e-15);
        assert!((c.row(1)[0] - 0.3).abs() < 1e-15 && (c.row(1)[1] - 0.7).abs() < 1e-15);
        let (ok, dev) = check_conditional_independence(spec.joint(), 1e-12).unwrap();
        assert!(ok && dev <= 1e-15);
        let cmi = conditional_mutual_information(spec.joint(), &[1], &[2], &[3]).unwrap();
        assert!(cmi < 1e-12);
    }

    #[test]
    fn dependent_pair_violates_independence() {
        let spec = dependent_pair().unwrap();
        let (ok, dev) = check_conditional_independence(spec.joint(), 1e-9).unwrap();
        assert!(!ok);
        assert!(dev > 0.1);
    }
}
