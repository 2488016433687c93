use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{IoError, Result};
use crate::region::{SubsetBoundReport, SweepPoint};
use crate::solver::{RegionStatus, SolverConfig, SolverState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub tool_version: String,
    pub command: String,
    pub problem: String,
    pub seed: u64,
    pub config: SolverConfig,
    pub lambda_grid: Vec<f64>,
    pub warm_start: bool,
    pub region_status: RegionStatus,
    pub wall_time_secs: f64,
}

/// Bound report for one solved point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointBounds {
    pub lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_weights: Option<Vec<f64>>,
    pub corollary4_rates: Vec<f64>,
    pub report: SubsetBoundReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultBundle {
    pub metadata: RunMetadata,
    pub points: Vec<SweepPoint>,
    #[serde(default)]
    pub bounds: Vec<PointBounds>,
    /// Converged state per point, in the order of `points`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub states: Option<Vec<Option<SolverState>>>,
}

impl ResultBundle {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?).map_err(|source| IoError::Write {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| IoError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn num_sources(&self) -> usize {
        self.points.iter().map(|p| p.rates.len()).max().unwrap_or(0)
    }
}
