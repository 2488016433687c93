//! TOML problem definitions.
//!
//! The dense joint is listed in row-major order over the axes
//! `(t, x_1, .., x_M, y)`, last axis fastest. The factored form gives `p(y)`,
//! one channel `p(x_i | y)` per source (rows indexed by `y`), and either the
//! keyword `"sources"` (`T` is the tuple of all `x_i`, first most significant)
//! or a table `p(t | x_1, .., x_M, y)` with rows in the same row-major order.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{IoError, Result};
use crate::prob::{DistortionMatrix, JointPmf};
use crate::problem::ProblemSpec;
use crate::solver::{InitMode, SolverConfig};
use crate::tensor::unravel;

/// Problem files shipped with the crate, by name.
pub const BUNDLED_PROBLEMS: &[(&str, &str)] = &[
    ("wz_binary_p30", include_str!("../../problems/wz_binary_p30.toml")),
    ("two_bsc_p30", include_str!("../../problems/two_bsc_p30.toml")),
    ("dependent_pair", include_str!("../../problems/dependent_pair.toml")),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub name: String,
    pub sizes: Sizes,
    pub joint: JointDef,
    pub distortion: DistortionDef,
    #[serde(default, skip_serializing_if = "SolverOverrides::is_empty")]
    pub solver: SolverOverrides,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sizes {
    pub t: usize,
    pub x: Vec<usize>,
    pub y: usize,
    pub t_hat: usize,
    /// Auxiliary alphabet sizes; defaults to `|X_i| + 1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aux: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum JointDef {
    Dense {
        probs: Vec<f64>,
    },
    Factored {
        p_y: Vec<f64>,
        channels: Vec<Vec<Vec<f64>>>,
        t: TRule,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TRule {
    Keyword(TKeyword),
    Table(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TKeyword {
    Sources,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DistortionDef {
    /// `1[t != t_hat]`; needs `|T| = |T_hat|`.
    Hamming,
    /// Sum of component mismatches over a mixed-radix product alphabet.
    /// `components` defaults to the source sizes.
    HammingSum {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        components: Option<Vec<usize>>,
    },
    Matrix {
        rows: Vec<Vec<f64>>,
    },
}

/// Solver settings a problem file may override.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outer_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stationarity_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_inner_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_outer_cycles: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init_mode: Option<InitMode>,
}

impl SolverOverrides {
    pub fn is_empty(&self) -> bool {
        *self == Self::default()
    }

    pub fn apply(&self, config: &mut SolverConfig) {
        if let Some(v) = self.restarts {
            config.restarts = v;
        }
        if let Some(v) = self.seed {
            config.rng_seed = v;
        }
        if let Some(v) = self.inner_tol {
            config.inner_tol = v;
        }
        if let Some(v) = self.outer_tol {
            config.outer_tol = v;
        }
        if let Some(v) = self.stationarity_tol {
            config.stationarity_tol = v;
        }
        if let Some(v) = self.max_inner_iters {
            config.max_inner_iters = v;
        }
        if let Some(v) = self.max_outer_cycles {
            config.max_outer_cycles = v;
        }
        if let Some(v) = self.init_mode {
            config.init_mode = v;
        }
    }
}

/// A parsed problem together with its solver overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedProblem {
    pub spec: ProblemSpec,
    pub solver: SolverOverrides,
}

fn mismatch(msg: String) -> IoError {
    IoError::DimensionMismatch(msg)
}

fn check_len(what: &str, got: usize, expected: usize) -> Result<()> {
    if got != expected {
        return Err(mismatch(format!("{what} has {got} entries, expected {expected}")));
    }
    Ok(())
}

impl ProblemFile {
    fn expand_joint(&self) -> Result<JointPmf> {
        let s = &self.sizes;
        let mut shape = vec![s.t];
        shape.extend_from_slice(&s.x);
        shape.push(s.y);
        match &self.joint {
            JointDef::Dense { probs } => {
                check_len("joint.probs", probs.len(), shape.iter().product())?;
                Ok(JointPmf::new(shape, probs.clone())?)
            }
            JointDef::Factored { p_y, channels, t } => {
                check_len("joint.p_y", p_y.len(), s.y)?;
                check_len("joint.channels", channels.len(), s.x.len())?;
                for (i, ch) in channels.iter().enumerate() {
                    check_len(&format!("joint.channels[{i}]"), ch.len(), s.y)?;
                    for row in ch {
                        check_len(&format!("joint.channels[{i}] row"), row.len(), s.x[i])?;
                    }
                }
                let n_xy: usize = s.x.iter().product::<usize>() * s.y;
                match t {
                    TRule::Keyword(TKeyword::Sources) => {
                        let n: usize = s.x.iter().product();
                        if s.t != n {
                            return Err(mismatch(format!(
                                "t = \"sources\" needs |T| = {n}, got {}",
                                s.t
                            )));
                        }
                    }
                    TRule::Table(rows) => {
                        check_len("joint.t", rows.len(), n_xy)?;
                        for row in rows {
                            check_len("joint.t row", row.len(), s.t)?;
                        }
                    }
                }
                // (x_1.., x_M, y) with y fastest
                let mut xy_shape = s.x.clone();
                xy_shape.push(s.y);
                let mut idx = vec![0; xy_shape.len()];
                let mut probs = vec![0.0; s.t * n_xy];
                let m = s.x.len();
                for flat in 0..n_xy {
                    unravel(flat, &xy_shape, &mut idx);
                    let y = idx[m];
                    let pxy = (0..m).fold(p_y[y], |acc, i| acc * channels[i][y][idx[i]]);
                    match t {
                        TRule::Keyword(TKeyword::Sources) => {
                            probs[(flat / s.y) * n_xy + flat] = pxy;
                        }
                        TRule::Table(rows) => {
                            for (tv, &pt) in rows[flat].iter().enumerate() {
                                probs[tv * n_xy + flat] = pxy * pt;
                            }
                        }
                    }
                }
                Ok(JointPmf::new(shape, probs)?)
            }
        }
    }

    fn expand_distortion(&self) -> Result<DistortionMatrix> {
        let s = &self.sizes;
        let d = match &self.distortion {
            DistortionDef::Hamming => {
                if s.t != s.t_hat {
                    return Err(mismatch(format!(
                        "hamming distortion needs |T| = |T_hat|, got {} and {}",
                        s.t, s.t_hat
                    )));
                }
                DistortionMatrix::hamming(s.t)
            }
            DistortionDef::HammingSum { components } => {
                let c = components.as_ref().unwrap_or(&s.x);
                let n: usize = c.iter().product();
                if n != s.t || n != s.t_hat {
                    return Err(mismatch(format!(
                        "hamming-sum over {c:?} has {n} symbols, but |T| = {} and |T_hat| = {}",
                        s.t, s.t_hat
                    )));
                }
                DistortionMatrix::hamming_sum(c)
            }
            DistortionDef::Matrix { rows } => {
                check_len("distortion.rows", rows.len(), s.t)?;
                for row in rows {
                    check_len("distortion row", row.len(), s.t_hat)?;
                }
                DistortionMatrix::new(s.t, s.t_hat, rows.concat())?
            }
        };
        Ok(d)
    }

    /// Expands and validates into a [`ProblemSpec`].
    pub fn into_problem(self) -> Result<LoadedProblem> {
        if self.sizes.x.is_empty() {
            return Err(mismatch("sizes.x must list at least one source".into()));
        }
        let joint = self.expand_joint()?;
        let distortion = self.expand_distortion()?;
        let spec = ProblemSpec::new(self.name, joint, distortion, self.sizes.aux)?;
        Ok(LoadedProblem {
            spec,
            solver: self.solver,
        })
    }

    /// Dense description of an existing problem.
    pub fn from_spec(spec: &ProblemSpec) -> Self {
        let d = spec.distortion();
        Self {
            name: spec.name.clone(),
            sizes: Sizes {
                t: spec.t_size(),
                x: spec.source_sizes().to_vec(),
                y: spec.y_size(),
                t_hat: spec.t_hat_size(),
                aux: Some(spec.aux_sizes().to_vec()),
            },
            joint: JointDef::Dense {
                probs: spec.joint().probs().to_vec(),
            },
            distortion: DistortionDef::Matrix {
                rows: d.values().chunks(d.cols()).map(<[f64]>::to_vec).collect(),
            },
            solver: SolverOverrides::default(),
        }
    }
}

/// Parses problem text; `origin` names the source in error messages.
pub fn parse_problem_str(text: &str, origin: &str) -> Result<LoadedProblem> {
    let file: ProblemFile = toml::from_str(text).map_err(|e| IoError::Parse {
        origin: origin.to_string(),
        message: e.to_string(),
    })?;
    file.into_problem()
}

/// Reads and validates a problem file. A path that does not exist but names a
/// bundled problem loads the bundled copy.
pub fn parse_problem(path: &Path) -> Result<LoadedProblem> {
    if !path.exists() {
        if let Some(p) = path.to_str().and_then(bundled_problem) {
            return p;
        }
    }
    let text = fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_problem_str(&text, &path.display().to_string())
}

pub fn bundled_problem(name: &str) -> Option<Result<LoadedProblem>> {
    BUNDLED_PROBLEMS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(n, text)| parse_problem_str(text, n))
}

/// Serializes a problem in dense form.
pub fn to_toml(spec: &ProblemSpec) -> String {
    toml::to_string(&ProblemFile::from_spec(spec)).expect("problem file is always representable")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::prob::check_conditional_independence;

    #[test]
    fn bundled_problems_parse() {
        for (name, _) in BUNDLED_PROBLEMS {
            let p = bundled_problem(name).unwrap().unwrap();
            assert_eq!(&p.spec.name, name);
        }
        let two = bundled_problem("two_bsc_p30").unwrap().unwrap().spec;
        assert_eq!(two.joint().shape(), &[4, 2, 2, 2]);
        assert!((two.joint().get(&[0, 0, 0, 0]) - 0.245).abs() < 1e-15);
        assert_eq!(two.aux_sizes(), &[3, 3]);
        assert_eq!(two.distortion(), &DistortionMatrix::hamming_sum(&[2, 2]));
        assert!(bundled_problem("missing").is_none());
    }

    #[test]
    fn bundled_match_catalog() {
        let pairs = [
            ("two_bsc_p30", catalog::two_bsc(0.3, 0.3).unwrap()),
            ("wz_binary_p30", catalog::wz_binary(0.3).unwrap()),
            ("dependent_pair", catalog::dependent_pair().unwrap()),
        ];
        for (name, reference) in pairs {
            let spec = bundled_problem(name).unwrap().unwrap().spec;
            assert_eq!(spec.joint().shape(), reference.joint().shape());
            for (a, b) in spec.joint().probs().iter().zip(reference.joint().probs()) {
                assert!((a - b).abs() < 1e-15, "{name}");
            }
            assert_eq!(spec.distortion(), reference.distortion());
        }
    }

    #[test]
    fn factored_expansion_is_conditionally_independent() {
        let spec = bundled_problem("two_bsc_p30").unwrap().unwrap().spec;
        let (ok, dev) = check_conditional_independence(spec.joint(), 1e-14).unwrap();
        assert!(ok && dev <= 1e-14);
    }

    #[test]
    fn dense_and_factored_agree() {
        let factored = bundled_problem("two_bsc_p30").unwrap().unwrap().spec;
        let dense = parse_problem_str(&to_toml(&factored), "dense").unwrap().spec;
        assert_eq!(dense, factored);
    }

    #[test]
    fn stochastic_t_table() {
        // T = X with probability 0.9, flipped otherwise, independent of Y
        let text = r#"
name = "noisy"
[sizes]
t = 2
x = [2]
y = 2
t_hat = 2
[joint]
kind = "factored"
p_y = [0.5, 0.5]
channels = [[[0.8, 0.2], [0.2, 0.8]]]
t = [[0.9, 0.1], [0.9, 0.1], [0.1, 0.9], [0.1, 0.9]]
[distortion]
kind = "hamming"
[solver]
restarts = 2
seed = 11
"#;
        let p = parse_problem_str(text, "noisy").unwrap();
        assert!((p.spec.joint().get(&[0, 0, 0]) - 0.5 * 0.8 * 0.9).abs() < 1e-15);
        assert!((p.spec.joint().get(&[1, 1, 1]) - 0.5 * 0.8 * 0.9).abs() < 1e-15);
        let mut cfg = SolverConfig::default();
        p.solver.apply(&mut cfg);
        assert_eq!((cfg.restarts, cfg.rng_seed), (2, 11));
    }

    #[test]
    fn negative_distortion_is_a_validation_error() {
        let text = r#"
name = "bad"
[sizes]
t = 2
x = [2]
y = 2
t_hat = 2
[joint]
kind = "dense"
probs = [0.25, 0.0, 0.0, 0.25, 0.25, 0.0, 0.0, 0.25]
[distortion]
kind = "matrix"
rows = [[0.0, 1.0], [-1.0, 0.0]]
"#;
        assert!(matches!(parse_problem_str(text, "bad"), Err(IoError::Validation(_))));
    }

    #[test]
    fn dimension_and_parse_errors() {
        let short = r#"
name = "short"
[sizes]
t = 2
x = [2]
y = 2
t_hat = 2
[joint]
kind = "dense"
probs = [0.5, 0.5]
[distortion]
kind = "hamming"
"#;
        assert!(matches!(parse_problem_str(short, "s"), Err(IoError::DimensionMismatch(_))));
        let wrong_t = short
            .replace("probs = [0.5, 0.5]", "p_y = [0.5, 0.5]\nchannels = [[[1.0, 0.0], [0.0, 1.0]]]\nt = \"sources\"")
            .replace("kind = \"dense\"", "kind = \"factored\"")
            .replace("t = 2\n", "t = 3\n");
        assert!(matches!(parse_problem_str(&wrong_t, "t"), Err(IoError::DimensionMismatch(_))));
        match parse_problem_str("name = \"x\"\n[sizes]\nt = \"two\"\n", "typo.toml") {
            Err(IoError::Parse { origin, message }) => {
                assert_eq!(origin, "typo.toml");
                assert!(message.contains("line"), "{message}");
            }
            other => panic!("expected a parse error, got {other:?}"),
        }
        assert!(matches!(
            parse_problem_str("name = \"x\"\nunknown = 1\n", "u"),
            Err(IoError::Parse { .. })
        ));
    }

    #[test]
    fn missing_file_names_the_path() {
        let err = parse_problem(Path::new("/nonexistent/problem.toml")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/problem.toml"));
    }
}
