use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("non-positive benefit {value} at index {index:?}")]
    NonPositiveBenefit { index: Option<usize>, value: f64 },
    #[error("label {0} is outside the label domain of the benefit")]
    UnknownLabel(f64),
    #[error("benefit profile is empty")]
    EmptyProfile,
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("unsupported alpha {0}")]
    UnsupportedAlpha(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("group {0} is empty")]
    EmptyGroup(&'static str),
    #[error("rate undefined: group {group} has no instance with label {label}")]
    UndefinedRate { group: &'static str, label: i8 },
    #[error("degenerate data: {0}")]
    DegenerateData(String),
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("too few rows: {rows} rows for {folds} folds")]
    TooFewRows { rows: usize, folds: usize },
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("domain collapse: a benefit fell below the floor {floor}")]
    DomainCollapse { floor: f64 },
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("dual multiplier reached lambda_max {lambda_max:e} with constraint still violated")]
    LambdaOverflow { lambda_max: f64 },
    #[error("every grid value was infeasible")]
    AllInfeasible,
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
        if expected == found {
            Ok(())
        } else {
            Err(Error::LengthMismatch { expected, found })
        }
    }
}
