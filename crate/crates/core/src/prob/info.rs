use super::pmf::{marginal, JointPmf};
use super::{ProbError, Result};

/// Shannon entropy in bits of an arbitrary nonnegative mass vector.
pub fn entropy(probs: &[f64]) -> f64 {
    -probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.log2())
        .sum::<f64>()
}

/// `h(p)` in bits.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(ProbError::OutOfRange(p));
    }
    Ok(entropy(&[p, 1.0 - p]))
}

/// `I(A; B)` in bits for a two-axis joint.
pub fn mutual_information(joint: &JointPmf) -> Result<f64> {
    if joint.rank() != 2 {
        return Err(ProbError::ShapeMismatch(format!(
            "mutual information needs a 2-axis joint, got rank {}",
            joint.rank()
        )));
    }
    let (na, nb) = (joint.shape()[0], joint.shape()[1]);
    let p = joint.probs();
    let pa: Vec<f64> = (0..na).map(|a| p[a * nb..(a + 1) * nb].iter().sum()).collect();
    let pb: Vec<f64> = (0..nb).map(|b| (0..na).map(|a| p[a * nb + b]).sum()).collect();
    let mut mi = 0.0;
    for a in 0..na {
        for b in 0..nb {
            let pab = p[a * nb + b];
            if pab > 0.0 {
                mi += pab * (pab / (pa[a] * pb[b])).log2();
            }
        }
    }
    Ok(mi.max(0.0))
}

fn entropy_of(joint: &JointPmf, axes: &[usize]) -> Result<f64> {
    if axes.is_empty() {
        return Ok(0.0);
    }
    Ok(entropy(marginal(joint, axes)?.probs()))
}

/// `I(A; B | C)` in bits; `c_axes` may be empty.
pub fn conditional_mutual_information(
    joint: &JointPmf,
    a_axes: &[usize],
    b_axes: &[usize],
    c_axes: &[usize],
) -> Result<f64> {
    if a_axes.is_empty() || b_axes.is_empty() {
        return Err(ProbError::EmptyAxisSet);
    }
    let overlap = |x: &[usize], y: &[usize]| x.iter().any(|v| y.contains(v));
    if overlap(a_axes, b_axes) || overlap(a_axes, c_axes) || overlap(b_axes, c_axes) {
        return Err(ProbError::AxesOverlap);
    }
    let union = |sets: &[&[usize]]| -> Vec<usize> { sets.iter().flat_map(|s| s.iter().copied()).collect() };
    let h_ac = entropy_of(joint, &union(&[a_axes, c_axes]))?;
    let h_bc = entropy_of(joint, &union(&[b_axes, c_axes]))?;
    let h_abc = entropy_of(joint, &union(&[a_axes, b_axes, c_axes]))?;
    let h_c = entropy_of(joint, c_axes)?;
    Ok((h_ac + h_bc - h_abc - h_c).max(0.0))
}

/// Tests `p(x_1..x_M | y) = prod_i p(x_i | y)` on a `(t, x_1.., x_M, y)` joint.
///
/// Returns whether the maximum absolute deviation is within `tol`, and the
/// deviation itself. Configurations with `p(y) = 0` are skipped.
pub fn check_conditional_independence(pmf: &JointPmf, tol: f64) -> Result<(bool, f64)> {
    let rank = pmf.rank();
    if rank < 3 {
        return Err(ProbError::ShapeMismatch(format!(
            "expected axes (t, x_1.., y), got rank {rank}"
        )));
    }
    let m = rank - 2;
    let y_axis = rank - 1;
    let ny = pmf.shape()[y_axis];
    let xs: Vec<usize> = pmf.shape()[1..=m].to_vec();
    let n_x: usize = xs.iter().product();
    // p(x, y), x-major
    let pxy = marginal(pmf, &(1..rank).collect::<Vec<_>>())?;
    let py: Vec<f64> = (0..ny)
        .map(|y| (0..n_x).map(|x| pxy.probs()[x * ny + y]).sum())
        .collect();
    let per_source: Vec<JointPmf> = (1..=m)
        .map(|i| marginal(pmf, &[i, y_axis]))
        .collect::<Result<_>>()?;

    let mut idx = vec![0usize; m];
    let mut max_dev: f64 = 0.0;
    for (y, &p_y) in py.iter().enumerate() {
        if p_y <= 0.0 {
            continue;
        }
        for x in 0..n_x {
            crate::tensor::unravel(x, &xs, &mut idx);
            let joint = pxy.probs()[x * ny + y] / p_y;
            let product: f64 = idx
                .iter()
                .enumerate()
                .map(|(i, &xi)| per_source[i].probs()[xi * ny + y] / p_y)
                .product();
            max_dev = max_dev.max((joint - product).abs());
        }
    }
    Ok((max_dev <= tol, max_dev))
}
