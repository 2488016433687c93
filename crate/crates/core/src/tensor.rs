//! Small dense row-major tensor used for the contractions in the solver.

/// Dense tensor of `f64` stored in row-major (last axis fastest) order.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(shape: Vec<usize>) -> Self {
        let len = shape.iter().product();
        Self {
            shape,
            data: vec![0.0; len],
        }
    }

    pub fn from_parts(shape: Vec<usize>, data: Vec<f64>) -> Self {
        debug_assert_eq!(shape.iter().product::<usize>(), data.len());
        Self { shape, data }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Product of the axis sizes before `axis`, the size of `axis`, and the
    /// product of the sizes after it.
    pub fn split_at_axis(&self, axis: usize) -> (usize, usize, usize) {
        split_shape(&self.shape, axis)
    }

    /// Mode product along `axis` with a row-major `in_dim x out_dim` matrix:
    /// `out[.., k, ..] = sum_n self[.., n, ..] * mat[n][k]`.
    pub fn mode_product(&self, axis: usize, mat: &[f64], out_dim: usize) -> Tensor {
        let (outer, n, inner) = self.split_at_axis(axis);
        debug_assert_eq!(mat.len(), n * out_dim);
        let mut shape = self.shape.clone();
        shape[axis] = out_dim;
        let mut out = vec![0.0; outer * out_dim * inner];
        for o in 0..outer {
            for a in 0..n {
                let src = &self.data[(o * n + a) * inner..(o * n + a + 1) * inner];
                for k in 0..out_dim {
                    let m = mat[a * out_dim + k];
                    if m == 0.0 {
                        continue;
                    }
                    let dst = &mut out[(o * out_dim + k) * inner..(o * out_dim + k + 1) * inner];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d += m * s;
                    }
                }
            }
        }
        Tensor { shape, data: out }
    }

    /// Sums out every axis not listed in `keep` (which must be ascending).
    pub fn sum_to(&self, keep: &[usize]) -> Tensor {
        let mut cur = self.clone();
        for axis in (0..self.shape.len()).rev() {
            if !keep.contains(&axis) {
                cur = cur.sum_axis(axis);
            }
        }
        cur
    }

    /// Sums out a single axis, removing it from the shape.
    pub fn sum_axis(&self, axis: usize) -> Tensor {
        let (outer, n, inner) = self.split_at_axis(axis);
        let mut shape = self.shape.clone();
        shape.remove(axis);
        let mut out = vec![0.0; outer * inner];
        for o in 0..outer {
            for a in 0..n {
                let src = &self.data[(o * n + a) * inner..(o * n + a + 1) * inner];
                for (d, s) in out[o * inner..(o + 1) * inner].iter_mut().zip(src) {
                    *d += s;
                }
            }
        }
        Tensor { shape, data: out }
    }

    /// Reorders axes so that output axis `i` is input axis `perm[i]`.
    pub fn permute(&self, perm: &[usize]) -> Tensor {
        let rank = self.shape.len();
        debug_assert_eq!(perm.len(), rank);
        let in_strides = strides(&self.shape);
        let shape: Vec<usize> = perm.iter().map(|&p| self.shape[p]).collect();
        let mut out = vec![0.0; self.data.len()];
        let mut idx = vec![0usize; rank];
        for slot in out.iter_mut() {
            let offset: usize = (0..rank).map(|i| idx[i] * in_strides[perm[i]]).sum();
            *slot = self.data[offset];
            increment(&mut idx, &shape);
        }
        Tensor { shape, data: out }
    }
}

pub fn split_shape(shape: &[usize], axis: usize) -> (usize, usize, usize) {
    let outer = shape[..axis].iter().product();
    let inner = shape[axis + 1..].iter().product();
    (outer, shape[axis], inner)
}

pub fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; shape.len()];
    for i in (0..shape.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * shape[i + 1];
    }
    s
}

/// Advances a mixed-radix multi-index (last digit fastest). Returns false on wrap.
pub fn increment(idx: &mut [usize], shape: &[usize]) -> bool {
    for i in (0..idx.len()).rev() {
        idx[i] += 1;
        if idx[i] < shape[i] {
            return true;
        }
        idx[i] = 0;
    }
    false
}

/// Decodes a flat row-major offset into a multi-index.
pub fn unravel(mut flat: usize, shape: &[usize], out: &mut [usize]) {
    for i in (0..shape.len()).rev() {
        out[i] = flat % shape[i];
        flat /= shape[i];
    }
}
