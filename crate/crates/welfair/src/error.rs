use std::path::PathBuf;

use serde::Serialize;
use welfair_core::Error as CoreError;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("missing column {0:?}")]
    MissingColumn(String),
    #[error("malformed number {value:?} at row {row}, column {column:?}")]
    MalformedNumber {
        /// 1-based data row (the header is not counted).
        row: usize,
        column: String,
        value: String,
    },
    #[error("no usable rows: {rejected} rows had missing values")]
    NoRows { rejected: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid model file: {0}")]
    Model(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        CliError::Csv { path: path.into(), source }
    }

    /// 0 success, 1 internal, 2 infeasible or non-convergent, 3 input or
    /// data error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if is_solver_failure(e) => 2,
            CliError::Internal(_) => 1,
            _ => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => match e {
                CoreError::Infeasible(_) | CoreError::LambdaOverflow { .. } => "infeasible",
                CoreError::AllInfeasible => "all_infeasible",
                CoreError::NonConvergence { .. } => "non_convergence",
                CoreError::DomainCollapse { .. } => "domain_collapse",
                _ => "invalid_input",
            },
            CliError::Io { .. } => "io",
            CliError::Csv { .. } => "csv",
            CliError::MissingColumn(_) => "missing_column",
            CliError::MalformedNumber { .. } => "malformed_number",
            CliError::NoRows { .. } => "no_rows",
            CliError::Config(_) => "config",
            CliError::Model(_) => "model",
            CliError::Internal(_) => "internal",
        }
    }

    /// One-line JSON record for standard error.
    pub fn to_json_line(&self) -> String {
        #[derive(Serialize)]
        struct Line<'a> {
            error: &'a str,
            exit_code: i32,
            message: String,
        }
        serde_json::to_string(&Line {
            error: self.kind(),
            exit_code: self.exit_code(),
            message: self.to_string(),
        })
        .unwrap_or_else(|_| format!("{{\"error\":\"{}\"}}", self.kind()))
    }
}

pub fn is_solver_failure(e: &CoreError) -> bool {
    matches!(
        e,
        CoreError::Infeasible(_)
            | CoreError::LambdaOverflow { .. }
            | CoreError::AllInfeasible
            | CoreError::NonConvergence { .. }
            | CoreError::DomainCollapse { .. }
    )
}
