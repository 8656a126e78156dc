//! Command-line arguments. Every flag overrides the matching key of the
//! `--config` file.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "welfair", version, about = "Welfare-constrained learning and fairness metrics")]
pub struct Cli {
    /// Seed for folds, restarts and data generation.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for sweeps; 0 uses one per processor.
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit one welfare-constrained model and print its report row.
    Train(TrainArgs),
    /// Fit a grid of (alpha, tau) cells and write a results table.
    Sweep(SweepArgs),
    /// Rank models from prediction files.
    Rank(RankArgs),
    /// Metrics report for predictions or a saved model.
    Metrics(MetricsArgs),
    /// Run a fairness mechanism.
    Mechanism(MechanismArgs),
    /// Generate a dataset and its true weights.
    Gen(GenArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct DataArgs {
    /// Dataset CSV.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Label column.
    #[arg(long)]
    pub label: Option<String>,
    /// `regression` or `classification`.
    #[arg(long)]
    pub task: Option<String>,
    /// 0/1 group column.
    #[arg(long)]
    pub group: Option<String>,
    /// Group rule `COLUMN:THRESHOLD`; rows above the threshold are G2.
    #[arg(long)]
    pub group_rule: Option<String>,
    /// Columns to ignore.
    #[arg(long, value_delimiter = ',')]
    pub drop: Vec<String>,
    /// Standardize non-binary features.
    #[arg(long)]
    pub standardize: bool,
    /// Feature columns never standardized.
    #[arg(long, value_delimiter = ',')]
    pub exempt: Vec<String>,
    /// Negate labels.
    #[arg(long)]
    pub flip_labels: bool,
    /// Divide labels by this value.
    #[arg(long)]
    pub target_rescale: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SolverArgs {
    #[arg(long)]
    pub tol_c: Option<f64>,
    #[arg(long)]
    pub tol_g: Option<f64>,
    #[arg(long)]
    pub lambda_max: Option<f64>,
    #[arg(long)]
    pub max_outer: Option<usize>,
    #[arg(long)]
    pub max_inner: Option<usize>,
    /// Random restarts for classification.
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Classification benefit table `b00,b01,b10,b11` over labels {-1,+1}.
    #[arg(long, value_delimiter = ',', num_args = 4)]
    pub benefit_table: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    /// Where to write the model file.
    #[arg(long)]
    pub out: PathBuf,
    /// Write the report row here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, value_delimiter = ',')]
    pub alphas: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub taus: Vec<f64>,
    /// Cross-validation folds; 1 uses the full data for training and evaluation.
    #[arg(long)]
    pub folds: Option<usize>,
    /// Results table; standard output if absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Save one model file per successful cell here.
    #[arg(long)]
    pub models_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeasureKind {
    Welfare,
    Atkinson,
    Ge,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    /// Prediction files, one model each; the file name is the model name.
    #[arg(required = true)]
    pub predictions: Vec<PathBuf>,
    /// Labels file. Without it the files hold benefit profiles directly.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Column of the labels file; falls back to the first column.
    #[arg(long, default_value = "y")]
    pub label_column: String,
    /// `regression` or `classification`.
    #[arg(long, default_value = "regression")]
    pub task: String,
    #[arg(long, value_enum, default_value_t = MeasureKind::Welfare)]
    pub measure: MeasureKind,
    /// Welfare or generalized-entropy parameter.
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    /// Atkinson inequality aversion; defaults to `1 - alpha`.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Also score each test fold of a shuffled split.
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long, value_delimiter = ',', num_args = 4)]
    pub benefit_table: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Prediction file aligned with the dataset.
    #[arg(long, conflicts_with = "model", required_unless_present = "model")]
    pub predictions: Option<PathBuf>,
    /// Model file to predict with.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, value_delimiter = ',', num_args = 4)]
    pub benefit_table: Option<Vec<f64>>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MechanismKind {
    DworkDelta,
    EpsilonNet,
    Speicher,
}

#[derive(Debug, Args)]
pub struct MechanismArgs {
    #[arg(value_enum)]
    pub kind: MechanismKind,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Violation threshold for dwork-delta; `inf` constrains nothing.
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
    /// Net radius for epsilon-net.
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    /// Generalized-entropy bound for speicher.
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    /// Mean-benefit grid for speicher; defaults to 21 points around least squares.
    #[arg(long, value_delimiter = ',')]
    pub mu: Vec<f64>,
    /// Read the entropy constraint of speicher as a lower bound.
    #[arg(long)]
    pub literal_ge: bool,
    /// Welfare parameter of the report.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    /// Labels exactly linear in the features.
    Realizable,
    /// Noisy regression with two groups.
    Regression,
    /// Noisy classification with two groups.
    Classification,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub n: usize,
    /// Weights including the intercept.
    #[arg(long)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = GenKind::Realizable)]
    pub kind: GenKind,
    /// Realizable weights are uniform in `[-scale, scale]`.
    #[arg(long, default_value_t = 1.0)]
    pub theta_scale: f64,
    /// Dataset CSV; the label column is `y`.
    #[arg(long)]
    pub out: PathBuf,
    /// True weights; defaults to the dataset path with extension `theta.toml`.
    #[arg(long)]
    pub theta: Option<PathBuf>,
}
