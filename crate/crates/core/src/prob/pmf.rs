use serde::{Deserialize, Serialize};

use super::{ProbError, Result, NORMALIZATION_TOL};
use crate::tensor::{increment, strides, Tensor};

/// Dense joint PMF over a product of finite alphabets.
///
/// For a problem definition the axes are ordered `(t, x_1, .., x_M, y)`, but the
/// type itself is axis-agnostic and also carries intermediate joints such as
/// `(x_1, .., x_M, w_1, .., w_M, y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointPmf {
    shape: Vec<usize>,
    probs: Vec<f64>,
}

impl JointPmf {
    /// Builds and validates a PMF.
    pub fn new(shape: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        let pmf = Self::new_unchecked(shape, probs);
        validate_joint(&pmf)?;
        Ok(pmf)
    }

    /// Builds a PMF without checking any invariant.
    pub fn new_unchecked(shape: Vec<usize>, probs: Vec<f64>) -> Self {
        Self { shape, probs }
    }

    pub fn uniform(shape: Vec<usize>) -> Self {
        let n: usize = shape.iter().product();
        Self {
            shape,
            probs: vec![1.0 / n as f64; n],
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    /// Probability at a multi-index.
    pub fn get(&self, idx: &[usize]) -> f64 {
        let s = strides(&self.shape);
        self.probs[idx.iter().zip(&s).map(|(i, s)| i * s).sum::<usize>()]
    }

    pub fn to_tensor(&self) -> Tensor {
        Tensor::from_parts(self.shape.clone(), self.probs.clone())
    }

    pub(crate) fn from_tensor(t: Tensor) -> Self {
        Self {
            shape: t.shape,
            probs: t.data,
        }
    }
}

/// Checks nonnegativity, normalization and shape consistency.
pub fn validate_joint(pmf: &JointPmf) -> Result<()> {
    if pmf.shape.is_empty() || pmf.shape.contains(&0) {
        return Err(ProbError::ShapeMismatch(format!(
            "alphabet sizes must be nonempty and positive, got {:?}",
            pmf.shape
        )));
    }
    let n: usize = pmf.shape.iter().product();
    if n != pmf.probs.len() {
        return Err(ProbError::ShapeMismatch(format!(
            "shape {:?} needs {} entries, got {}",
            pmf.shape,
            n,
            pmf.probs.len()
        )));
    }
    for (index, &value) in pmf.probs.iter().enumerate() {
        if !(value >= 0.0) || !value.is_finite() {
            return Err(ProbError::NegativeProbability { index, value });
        }
    }
    let total: f64 = pmf.probs.iter().sum();
    let deviation = 1.0 - total;
    if deviation.abs() > NORMALIZATION_TOL {
        return Err(ProbError::NotNormalized(deviation));
    }
    Ok(())
}

fn check_axes(rank: usize, axes: &[usize]) -> Result<Vec<usize>> {
    let mut sorted = axes.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if let Some(&axis) = sorted.iter().find(|&&a| a >= rank) {
        return Err(ProbError::AxisOutOfRange { axis, rank });
    }
    Ok(sorted)
}

/// Marginal onto `keep_axes`, which are kept in ascending order.
pub fn marginal(pmf: &JointPmf, keep_axes: &[usize]) -> Result<JointPmf> {
    if keep_axes.is_empty() {
        return Err(ProbError::EmptyAxisSet);
    }
    let keep = check_axes(pmf.rank(), keep_axes)?;
    Ok(JointPmf::from_tensor(pmf.to_tensor().sum_to(&keep)))
}

/// Conditional PMF `p(target | given)`, stored given-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalPmf {
    pub given_shape: Vec<usize>,
    pub target_shape: Vec<usize>,
    /// `probs[g * target_len + t]`.
    pub probs: Vec<f64>,
    /// Given configurations with zero marginal mass, filled uniformly.
    pub degenerate: Vec<bool>,
}

impl ConditionalPmf {
    pub fn target_len(&self) -> usize {
        self.target_shape.iter().product()
    }

    pub fn row(&self, given: usize) -> &[f64] {
        let n = self.target_len();
        &self.probs[given * n..(given + 1) * n]
    }

    pub fn any_degenerate(&self) -> bool {
        self.degenerate.iter().any(|&d| d)
    }
}

/// Conditional distribution of `target_axes` given `given_axes`.
///
/// Zero-probability conditioning configurations get a uniform row and are
/// flagged in [`ConditionalPmf::degenerate`].
pub fn conditional(
    pmf: &JointPmf,
    target_axes: &[usize],
    given_axes: &[usize],
) -> Result<ConditionalPmf> {
    if target_axes.is_empty() {
        return Err(ProbError::EmptyAxisSet);
    }
    let target = check_axes(pmf.rank(), target_axes)?;
    let given = check_axes(pmf.rank(), given_axes)?;
    if target.iter().any(|a| given.contains(a)) {
        return Err(ProbError::AxesOverlap);
    }
    let mut keep: Vec<usize> = target.iter().chain(&given).copied().collect();
    keep.sort_unstable();
    let joint = pmf.to_tensor().sum_to(&keep);
    // reorder to (given..., target...)
    let perm: Vec<usize> = given
        .iter()
        .chain(&target)
        .map(|a| keep.iter().position(|k| k == a).unwrap())
        .collect();
    let joint = joint.permute(&perm);
    let given_shape: Vec<usize> = given.iter().map(|&a| pmf.shape[a]).collect();
    let target_shape: Vec<usize> = target.iter().map(|&a| pmf.shape[a]).collect();
    let n_given: usize = given_shape.iter().product();
    let n_target: usize = target_shape.iter().product();
    let mut probs = joint.data;
    let mut degenerate = vec![false; n_given];
    for (g, flag) in degenerate.iter_mut().enumerate() {
        let row = &mut probs[g * n_target..(g + 1) * n_target];
        let mass: f64 = row.iter().sum();
        if mass > 0.0 {
            row.iter_mut().for_each(|v| *v /= mass);
        } else {
            row.iter_mut().for_each(|v| *v = 1.0 / n_target as f64);
            *flag = true;
        }
    }
    Ok(ConditionalPmf {
        given_shape,
        target_shape,
        probs,
        degenerate,
    })
}

/// Row-stochastic matrix, e.g. an encoder channel `q(w | x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StochasticMatrix {
    rows: usize,
    cols: usize,
    probs: Vec<f64>,
}

impl StochasticMatrix {
    pub fn new(rows: usize, cols: usize, probs: Vec<f64>) -> Result<Self> {
        let m = Self::new_unchecked(rows, cols, probs);
        m.validate()?;
        Ok(m)
    }

    pub fn new_unchecked(rows: usize, cols: usize, probs: Vec<f64>) -> Self {
        Self { rows, cols, probs }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(ProbError::ShapeMismatch("ragged rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn uniform(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            probs: vec![1.0 / cols as f64; rows * cols],
        }
    }

    /// Noiseless channel padded with unused output symbols when `cols > rows`.
    pub fn identity(rows: usize, cols: usize) -> Self {
        assert!(cols >= rows);
        let mut probs = vec![0.0; rows * cols];
        for r in 0..rows {
            probs[r * cols + r] = 1.0;
        }
        Self { rows, cols, probs }
    }

    /// Every row equal to `row`.
    pub fn constant(rows: usize, row: &[f64]) -> Result<Self> {
        Self::new(rows, row.len(), row.repeat(rows))
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 || self.probs.len() != self.rows * self.cols {
            return Err(ProbError::ShapeMismatch(format!(
                "{}x{} matrix with {} entries",
                self.rows,
                self.cols,
                self.probs.len()
            )));
        }
        for (index, &value) in self.probs.iter().enumerate() {
            if !(value >= 0.0) || !value.is_finite() {
                return Err(ProbError::NegativeProbability { index, value });
            }
        }
        for row in 0..self.rows {
            let sum: f64 = self.row(row).iter().sum();
            if (sum - 1.0).abs() > NORMALIZATION_TOL {
                return Err(ProbError::NotStochastic { row, sum });
            }
        }
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.probs[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.probs[r * self.cols..(r + 1) * self.cols]
    }

    pub(crate) fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.probs[r * self.cols..(r + 1) * self.cols]
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Per-symbol distortion `d(t, t_hat)`, rows indexed by `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl DistortionMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || values.len() != rows * cols {
            return Err(ProbError::ShapeMismatch(format!(
                "{rows}x{cols} distortion matrix with {} entries",
                values.len()
            )));
        }
        for (i, &value) in values.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(ProbError::InvalidDistortion {
                    row: i / cols,
                    col: i % cols,
                    value,
                });
            }
        }
        Ok(Self { rows, cols, values })
    }

    /// `d(t, t_hat) = 1[t != t_hat]` on an `n`-letter alphabet.
    pub fn hamming(n: usize) -> Self {
        let values = (0..n * n)
            .map(|i| if i / n == i % n { 0.0 } else { 1.0 })
            .collect();
        Self {
            rows: n,
            cols: n,
            values,
        }
    }

    /// Sum of per-component Hamming distortions on a product alphabet whose
    /// symbols are mixed-radix tuples over `components` (first most significant).
    pub fn hamming_sum(components: &[usize]) -> Self {
        let n: usize = components.iter().product();
        let mut a = vec![0usize; components.len()];
        let mut b = vec![0usize; components.len()];
        let mut values = Vec::with_capacity(n * n);
        for t in 0..n {
            crate::tensor::unravel(t, components, &mut a);
            for t_hat in 0..n {
                crate::tensor::unravel(t_hat, components, &mut b);
                let mismatches = a.iter().zip(&b).filter(|(x, y)| x != y).count();
                values.push(mismatches as f64);
            }
        }
        Self {
            rows: n,
            cols: n,
            values,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, t: usize, t_hat: usize) -> f64 {
        self.values[t * self.cols + t_hat]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.rows, self.cols, self.values.iter().map(|v| v * c).collect())
    }
}

/// Iterates over every multi-index of `shape` (last axis fastest).
pub(crate) fn for_each_index(shape: &[usize], mut f: impl FnMut(&[usize])) {
    if shape.contains(&0) {
        return;
    }
    let mut idx = vec![0usize; shape.len()];
    loop {
        f(&idx);
        if !increment(&mut idx, shape) {
            break;
        }
    }
}
