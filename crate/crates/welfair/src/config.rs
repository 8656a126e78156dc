//! Experiment configuration files (TOML).
//!
//! ```toml
//! alphas = [0.3, 0.5, 0.8]
//! taus = [0.5, 1.0, 1.5, 2.0]
//! folds = 1
//! seed = 7
//! output = "results.csv"
//!
//! [data]
//! path = "data.csv"
//! label = "y"
//! task = "regression"
//! group = "g"
//!
//! [preprocess]
//! standardize = true
//! exempt = ["binary_flag"]
//!
//! [solver]
//! tol_c = 1e-6
//! restarts = 8
//!
//! [benefit]
//! kind = "table"
//! b00 = 1.0
//! b01 = 1.5
//! b10 = 0.0
//! b11 = 1.0
//! ```
//!
//! Every key has a default; command-line flags override file values.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use welfair_core::benefits::{fit_binary_benefit_pm1, BinaryBenefitTable};
use welfair_core::dataset::{preprocess, PreprocessConfig};
use welfair_core::{BenefitSpec, Dataset, SolverConfig, Task};

use crate::csvio::{task_serde, CsvSchema, GroupRuleSpec};
use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub alphas: Vec<f64>,
    pub taus: Vec<f64>,
    /// Cross-validation folds; 1 trains and evaluates on the full data.
    pub folds: usize,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub data: Option<DataSection>,
    pub preprocess: PreprocessSection,
    pub solver: SolverSection,
    pub benefit: BenefitSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            alphas: vec![0.5],
            taus: vec![1.0],
            folds: 1,
            seed: 0,
            output: None,
            data: None,
            preprocess: PreprocessSection::default(),
            solver: SolverSection::default(),
            benefit: BenefitSection::Default,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub path: PathBuf,
    pub label: String,
    #[serde(default = "default_task", with = "task_serde")]
    pub task: Task,
    #[serde(default)]
    pub group: Option<String>,
    #[serde(default)]
    pub group_rule: Option<GroupRuleSpec>,
    #[serde(default)]
    pub drop: Vec<String>,
}

fn default_task() -> Task {
    Task::Regression
}

impl DataSection {
    pub fn schema(&self) -> CsvSchema {
        CsvSchema {
            label: self.label.clone(),
            task: self.task,
            group: self.group.clone(),
            group_rule: self.group_rule.clone(),
            drop: self.drop.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PreprocessSection {
    pub standardize: bool,
    /// Feature columns never standardized, by name.
    pub exempt: Vec<String>,
    pub flip_labels: bool,
    pub target_rescale: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub tol_c: f64,
    pub tol_g: f64,
    pub lambda_max: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    pub benefit_floor: f64,
    pub restarts: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        let c = SolverConfig::default();
        SolverSection {
            tol_c: c.tol_c,
            tol_g: c.tol_g,
            lambda_max: c.lambda_max,
            max_outer: c.max_outer,
            max_inner: c.max_inner,
            benefit_floor: c.benefit_floor,
            restarts: c.restarts,
        }
    }
}

impl SolverSection {
    pub fn to_config(&self, seed: u64) -> SolverConfig {
        SolverConfig {
            tol_c: self.tol_c,
            tol_g: self.tol_g,
            lambda_max: self.lambda_max,
            max_outer: self.max_outer,
            max_inner: self.max_inner,
            benefit_floor: self.benefit_floor,
            restarts: self.restarts,
            seed,
        }
    }
}

/// Benefit used by classification constraints and reports. Regression
/// always uses `y_hat - y + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BenefitSection {
    /// False negative 0, true positive and true negative 1, false positive 1.5.
    Default,
    /// Benefit table over `{-1, +1}`; `b00` is ground truth -1, prediction -1.
    Table { b00: f64, b01: f64, b10: f64, b11: f64 },
}

impl BenefitSection {
    pub fn spec(&self, task: Task) -> BenefitSpec {
        match (task, self) {
            (Task::Regression, _) => BenefitSpec::regression(),
            (Task::Classification, BenefitSection::Default) => BenefitSpec::classification_default(),
            (Task::Classification, BenefitSection::Table { b00, b01, b10, b11 }) => {
                fit_binary_benefit_pm1(&BinaryBenefitTable::new(*b00, *b01, *b10, *b11))
            }
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text)
    }

    /// Canonical serialization.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| CliError::Internal(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.alphas.is_empty() || self.taus.is_empty() {
            return Err(CliError::Config("alpha and tau lists must be non-empty".into()));
        }
        if let Some(a) = self.alphas.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
            return Err(CliError::Config(format!("alpha {a} is outside (0, 1)")));
        }
        if let Some(t) = self.taus.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
            return Err(CliError::Config(format!("tau {t} must be positive")));
        }
        if self.folds == 0 {
            return Err(CliError::Config("folds must be at least 1".into()));
        }
        if self.preprocess.target_rescale.is_some_and(|r| r.is_nan() || r <= 0.0) {
            return Err(CliError::Config("target_rescale must be positive".into()));
        }
        self.solver
            .to_config(self.seed)
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn solver_config(&self) -> SolverConfig {
        self.solver.to_config(self.seed)
    }
}

impl PreprocessSection {
    pub fn is_noop(&self) -> bool {
        !self.standardize && !self.flip_labels && self.target_rescale.is_none()
    }

    /// Applies the section; returns the dataset and the names of
    /// zero-variance columns left as they were.
    pub fn apply(&self, dataset: &Dataset) -> Result<(Dataset, Vec<String>)> {
        let names = dataset.column_names();
        let exempt = self
            .exempt
            .iter()
            .map(|e| {
                names[..dataset.k() - 1]
                    .iter()
                    .position(|n| n == e)
                    .ok_or_else(|| CliError::MissingColumn(e.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        let out = preprocess(
            dataset,
            &PreprocessConfig {
                standardize: self.standardize,
                exempt,
                flip_labels: self.flip_labels,
                target_rescale: self.target_rescale,
            },
        )?;
        let zero = out.zero_variance.iter().map(|&j| names[j].clone()).collect();
        Ok((out.dataset, zero))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_round_trip() {
        let c = ExperimentConfig::from_toml("").unwrap();
        assert_eq!(c, ExperimentConfig::default());
        let text = r#"
alphas = [0.3, 0.8]
taus = [1.5, 2.0]
seed = 7

[data]
path = "d.csv"
label = "y"
task = "classification"
group = "g"

[preprocess]
standardize = true
exempt = ["flag"]

[solver]
restarts = 3

[benefit]
kind = "table"
b00 = 1.0
b01 = 1.5
b10 = 0.0
b11 = 1.0
"#;
        let c = ExperimentConfig::from_toml(text).unwrap();
        c.validate().unwrap();
        assert_eq!(c.solver.restarts, 3);
        assert_eq!(c.solver.tol_c, 1e-6);
        assert_eq!(c.data.as_ref().unwrap().task, Task::Classification);
        let again = ExperimentConfig::from_toml(&c.to_toml().unwrap()).unwrap();
        assert_eq!(again, c);
        assert_eq!(again.to_toml().unwrap(), c.to_toml().unwrap());
        assert_eq!(c.benefit.spec(Task::Classification), BenefitSpec::classification_default());
    }

    #[test]
    fn validation() {
        let mut c = ExperimentConfig {
            alphas: vec![],
            ..Default::default()
        };
        assert!(c.validate().is_err());
        c.alphas = vec![1.0];
        assert!(c.validate().is_err());
        c.alphas = vec![0.5];
        c.taus = vec![-1.0];
        assert!(c.validate().is_err());
        assert!(ExperimentConfig::from_toml("unknown = 1").is_err());
    }
}
