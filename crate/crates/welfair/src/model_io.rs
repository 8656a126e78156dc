//! Plain-text (TOML) model files.
//!
//! ```toml
//! format = "welfair-model"
//! version = 1
//! task = "regression"
//! k = 3
//! weights = [0.25, -1.5, 16.0]
//! status = "optimal"
//! lambda = 240.0
//! columns = ["x1", "x2", "intercept"]
//!
//! [constraint]
//! alpha = 0.5
//! tau = 4.0
//! scale_c = 5.0
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use welfair_core::solver::{ConstraintSpec, LinearModel, SolveStatus};
use welfair_core::Task;

use crate::csvio::task_serde;
use crate::error::{CliError, Result};

pub const MODEL_FORMAT: &str = "welfair-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintEcho {
    pub alpha: f64,
    pub tau: f64,
    pub scale_c: f64,
}

impl From<&ConstraintSpec> for ConstraintEcho {
    fn from(s: &ConstraintSpec) -> Self {
        ConstraintEcho {
            alpha: s.alpha,
            tau: s.tau,
            scale_c: s.scale_c,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    #[serde(with = "task_serde")]
    pub task: Task,
    pub k: usize,
    pub weights: Vec<f64>,
    /// Solver status, or a free-form origin such as `generated`.
    #[serde(default)]
    pub status: Option<String>,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub columns: Vec<String>,
    #[serde(default)]
    pub constraint: Option<ConstraintEcho>,
}

impl ModelFile {
    pub fn new(task: Task, model: &LinearModel) -> Self {
        ModelFile {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            task,
            k: model.k(),
            weights: model.weights().to_vec(),
            status: None,
            lambda: None,
            columns: Vec::new(),
            constraint: None,
        }
    }

    pub fn with_status(mut self, status: SolveStatus) -> Self {
        self.status = Some(status.as_str().to_string());
        self
    }

    pub fn model(&self) -> Result<LinearModel> {
        Ok(LinearModel::new(self.weights.clone())?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| CliError::Internal(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let m: ModelFile = toml::from_str(text).map_err(|e| CliError::Model(e.to_string()))?;
        if m.format != MODEL_FORMAT {
            return Err(CliError::Model(format!("unexpected format {:?}", m.format)));
        }
        if m.version != MODEL_VERSION {
            return Err(CliError::Model(format!("unsupported version {}", m.version)));
        }
        if m.weights.len() != m.k {
            return Err(CliError::Model(format!(
                "k = {} but {} weights",
                m.k,
                m.weights.len()
            )));
        }
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml()?).map_err(|e| CliError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let w = vec![0.1 + 0.2, -1.0 / 3.0, 1e-300, 12345.678901234567, f64::MIN_POSITIVE];
        let m = LinearModel::new(w.clone()).unwrap();
        let mut f = ModelFile::new(Task::Regression, &m).with_status(SolveStatus::Optimal);
        f.lambda = Some(240.00000000000003);
        f.constraint = Some(ConstraintEcho { alpha: 0.5, tau: 4.0, scale_c: 5.0 });
        let back = ModelFile::from_toml(&f.to_toml().unwrap()).unwrap();
        assert_eq!(back, f);
        for (a, b) in back.weights.iter().zip(&w) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn rejects_inconsistent_files() {
        let text = "format = \"welfair-model\"\nversion = 1\ntask = \"regression\"\nk = 3\nweights = [1.0]\n";
        assert!(matches!(ModelFile::from_toml(text), Err(CliError::Model(_))));
        let text = "format = \"other\"\nversion = 1\ntask = \"regression\"\nk = 1\nweights = [1.0]\n";
        assert!(ModelFile::from_toml(text).is_err());
    }
}
