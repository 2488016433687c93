use serde::{Deserialize, Serialize};

use super::{RegionError, Result};
use crate::prob::{conditional_mutual_information, marginal, mutual_information, JointPmf};
use crate::problem::ProblemSpec;
use crate::solver::{rates, SolverState};
use crate::tensor::increment;

/// Subset enumeration is `2^M`; beyond this the joint is impractically large anyway.
pub const MAX_SOURCES: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetBound {
    /// 0-based source indices, ascending.
    pub subset: Vec<usize>,
    /// `I(X_A; W_A | W_{A^c}, Y)`
    pub inner: f64,
    /// `sum_{i in A} I(X_i; W_i | Y)`
    pub outer: f64,
    /// `sum_{i in A} R_i`
    pub sum_rate: f64,
}

impl SubsetBound {
    pub fn gap(&self) -> f64 {
        self.outer - self.inner
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetBoundReport {
    pub entries: Vec<SubsetBound>,
}

impl SubsetBoundReport {
    pub fn max_gap(&self) -> f64 {
        self.entries.iter().map(|e| e.gap().abs()).fold(0.0, f64::max)
    }

    /// Largest shortfall of a sum rate below its inner-bound requirement.
    pub fn max_sum_rate_violation(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.inner - e.sum_rate)
            .fold(0.0, f64::max)
    }
}

/// Joint over `(x_1.., x_M, w_1.., w_M, y)` induced by the encoders.
fn full_joint(spec: &ProblemSpec, state: &SolverState) -> Result<JointPmf> {
    let m = spec.num_sources();
    let pxy = marginal(spec.joint(), &(1..=m + 1).collect::<Vec<_>>())?;
    let mut shape: Vec<usize> = spec.source_sizes().to_vec();
    shape.extend_from_slice(spec.aux_sizes());
    shape.push(spec.y_size());
    let mut probs = Vec::with_capacity(shape.iter().product());
    let mut idx = vec![0; shape.len()];
    let mut xy = vec![0; m + 1];
    loop {
        xy[..m].copy_from_slice(&idx[..m]);
        xy[m] = idx[2 * m];
        let mut p = pxy.get(&xy);
        for i in 0..m {
            if p == 0.0 {
                break;
            }
            p *= state.encoders[i].get(idx[i], idx[m + i]);
        }
        probs.push(p);
        if !increment(&mut idx, &shape) {
            break;
        }
    }
    Ok(JointPmf::new_unchecked(shape, probs))
}

/// Evaluates the inner and outer bound expressions for every nonempty subset
/// of sources, in order of the subset's bitmask.
pub fn subset_bounds(spec: &ProblemSpec, state: &SolverState) -> Result<SubsetBoundReport> {
    let m = spec.num_sources();
    if m > MAX_SOURCES {
        return Err(RegionError::TooManySources {
            m,
            limit: MAX_SOURCES,
        });
    }
    state.validate(spec)?;
    let joint = full_joint(spec, state)?;
    let y = 2 * m;
    let singles = (0..m)
        .map(|i| conditional_mutual_information(&joint, &[i], &[m + i], &[y]))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let r = rates(spec, state);
    let mut entries = Vec::with_capacity((1 << m) - 1);
    for mask in 1usize..(1 << m) {
        let subset: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
        let xs: Vec<usize> = subset.clone();
        let ws: Vec<usize> = subset.iter().map(|i| m + i).collect();
        let mut given: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 0).map(|i| m + i).collect();
        given.push(y);
        entries.push(SubsetBound {
            inner: conditional_mutual_information(&joint, &xs, &ws, &given)?,
            outer: subset.iter().map(|&i| singles[i]).sum(),
            sum_rate: subset.iter().map(|&i| r[i]).sum(),
            subset,
        });
    }
    Ok(SubsetBoundReport { entries })
}

/// `I(X_i; W_i) - I(W_i; Y)` per source.
pub fn corollary4_rates(spec: &ProblemSpec, state: &SolverState) -> Result<Vec<f64>> {
    state.validate(spec)?;
    (0..spec.num_sources())
        .map(|i| {
            let pxy = spec.source_side_joint(i);
            let q = &state.encoders[i];
            let (nx, ny, nw) = (q.rows(), spec.y_size(), q.cols());
            let mut pxw = vec![0.0; nx * nw];
            let mut pwy = vec![0.0; nw * ny];
            for x in 0..nx {
                for yv in 0..ny {
                    let p = pxy.get(&[x, yv]);
                    for w in 0..nw {
                        let v = p * q.get(x, w);
                        pxw[x * nw + w] += v;
                        pwy[w * ny + yv] += v;
                    }
                }
            }
            let a = mutual_information(&JointPmf::new_unchecked(vec![nx, nw], pxw))?;
            let b = mutual_information(&JointPmf::new_unchecked(vec![nw, ny], pwy))?;
            Ok(a - b)
        })
        .collect()
}
