//! Problem definition: the source joint, distortion measure and auxiliary
//! alphabet sizes.

use crate::prob::{marginal, validate_joint, DistortionMatrix, JointPmf, ProbError};

/// A validated distributed remote source coding instance.
///
/// The joint is laid out over axes `(t, x_1, .., x_M, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub name: String,
    joint: JointPmf,
    distortion: DistortionMatrix,
    aux_sizes: Vec<usize>,
    // p(x_i, y) per source, x-major
    side_joints: Vec<JointPmf>,
}

impl ProblemSpec {
    /// Validates and builds a problem. `aux_sizes = None` uses `|X_i| + 1`.
    pub fn new(
        name: impl Into<String>,
        joint: JointPmf,
        distortion: DistortionMatrix,
        aux_sizes: Option<Vec<usize>>,
    ) -> Result<Self, ProbError> {
        validate_joint(&joint)?;
        if joint.rank() < 3 {
            return Err(ProbError::ShapeMismatch(format!(
                "joint must have axes (t, x_1.., x_M, y) with M >= 1, got rank {}",
                joint.rank()
            )));
        }
        if distortion.rows() != joint.shape()[0] {
            return Err(ProbError::ShapeMismatch(format!(
                "distortion has {} rows but |T| = {}",
                distortion.rows(),
                joint.shape()[0]
            )));
        }
        let m = joint.rank() - 2;
        let aux_sizes =
            aux_sizes.unwrap_or_else(|| joint.shape()[1..=m].iter().map(|x| x + 1).collect());
        if aux_sizes.len() != m || aux_sizes.contains(&0) {
            return Err(ProbError::ShapeMismatch(format!(
                "need {m} positive auxiliary alphabet sizes, got {aux_sizes:?}"
            )));
        }
        let y_axis = joint.rank() - 1;
        let side_joints = (1..=m)
            .map(|i| marginal(&joint, &[i, y_axis]))
            .collect::<Result<_, _>>()?;
        Ok(Self {
            name: name.into(),
            joint,
            distortion,
            aux_sizes,
            side_joints,
        })
    }

    pub fn with_aux_sizes(&self, aux_sizes: Vec<usize>) -> Result<Self, ProbError> {
        Self::new(
            self.name.clone(),
            self.joint.clone(),
            self.distortion.clone(),
            Some(aux_sizes),
        )
    }

    pub fn joint(&self) -> &JointPmf {
        &self.joint
    }

    pub fn distortion(&self) -> &DistortionMatrix {
        &self.distortion
    }

    pub fn aux_sizes(&self) -> &[usize] {
        &self.aux_sizes
    }

    /// Number of distributed sources `M`.
    pub fn num_sources(&self) -> usize {
        self.joint.rank() - 2
    }

    pub fn t_size(&self) -> usize {
        self.joint.shape()[0]
    }

    pub fn t_hat_size(&self) -> usize {
        self.distortion.cols()
    }

    pub fn source_sizes(&self) -> &[usize] {
        &self.joint.shape()[1..=self.num_sources()]
    }

    pub fn y_size(&self) -> usize {
        *self.joint.shape().last().unwrap()
    }

    pub fn y_axis(&self) -> usize {
        self.joint.rank() - 1
    }

    /// `p(x_i, y)` for source `i` (0-based), x-major.
    pub fn source_side_joint(&self, i: usize) -> &JointPmf {
        &self.side_joints[i]
    }
}
