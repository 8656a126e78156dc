//! Homogeneous datasets (last feature column is the constant 1), the
//! preprocessing rules applied before training, seeded synthetic data and
//! k-fold splitting.
//!
//! All randomness comes from `ChaCha8Rng::seed_from_u64(seed)`, a
//! counter-based stream cipher generator, so a seed fully determines every
//! generated value.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::math;
use crate::solver::LinearModel;

pub const INTERCEPT_COLUMN: &str = "intercept";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Task {
    Regression,
    Classification,
}

impl Task {
    pub fn as_str(&self) -> &'static str {
        match self {
            Task::Regression => "regression",
            Task::Classification => "classification",
        }
    }
}

impl core::str::FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "regression" => Ok(Task::Regression),
            "classification" => Ok(Task::Classification),
            other => Err(Error::param(format!("unknown task {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GroupId {
    G1,
    G2,
}

impl GroupId {
    pub fn name(&self) -> &'static str {
        match self {
            GroupId::G1 => "G1",
            GroupId::G2 => "G2",
        }
    }
}

/// Binary membership of every individual in `G1` or `G2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupAssignment {
    membership: Vec<GroupId>,
    counts: [usize; 2],
}

impl GroupAssignment {
    pub fn new(membership: Vec<GroupId>) -> Self {
        let g2 = membership.iter().filter(|g| **g == GroupId::G2).count();
        let counts = [membership.len() - g2, g2];
        GroupAssignment { membership, counts }
    }

    /// `false` maps to `G1`, `true` to `G2`.
    pub fn from_flags(flags: &[bool]) -> Self {
        GroupAssignment::new(
            flags
                .iter()
                .map(|&f| if f { GroupId::G2 } else { GroupId::G1 })
                .collect(),
        )
    }

    pub fn membership(&self) -> &[GroupId] {
        &self.membership
    }

    pub fn len(&self) -> usize {
        self.membership.len()
    }

    pub fn is_empty(&self) -> bool {
        self.membership.is_empty()
    }

    pub fn count(&self, g: GroupId) -> usize {
        match g {
            GroupId::G1 => self.counts[0],
            GroupId::G2 => self.counts[1],
        }
    }

    /// Errors with `EmptyGroup` unless both groups have members.
    pub fn require_both(&self) -> Result<()> {
        for g in [GroupId::G1, GroupId::G2] {
            if self.count(g) == 0 {
                return Err(Error::EmptyGroup(g.name()));
            }
        }
        Ok(())
    }

    /// The same individuals with the group labels exchanged.
    pub fn swapped(&self) -> Self {
        GroupAssignment::new(
            self.membership
                .iter()
                .map(|g| match g {
                    GroupId::G1 => GroupId::G2,
                    GroupId::G2 => GroupId::G1,
                })
                .collect(),
        )
    }

    pub fn subset(&self, indices: &[usize]) -> Self {
        GroupAssignment::new(indices.iter().map(|&i| self.membership[i]).collect())
    }
}

/// Assigns `G2` to rows whose value in `column` exceeds `threshold`
/// (for a binary 0/1 column use threshold 0.5).
#[derive(Debug, Clone, PartialEq)]
pub struct GroupRule {
    pub column: String,
    pub threshold: f64,
}

impl GroupRule {
    pub fn apply(&self, values: &[f64]) -> GroupAssignment {
        GroupAssignment::new(
            values
                .iter()
                .map(|&v| if v > self.threshold { GroupId::G2 } else { GroupId::G1 })
                .collect(),
        )
    }
}

/// Feature matrix in homogeneous form with labels and optional groups.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    n: usize,
    k: usize,
    labels: Vec<f64>,
    groups: Option<GroupAssignment>,
    task: Task,
    column_names: Vec<String>,
}

impl Dataset {
    /// Builds a dataset from raw feature rows (row-major, `n x raw_dim`) and
    /// appends the homogeneous column.
    pub fn from_raw(
        raw: &[f64],
        raw_dim: usize,
        labels: Vec<f64>,
        task: Task,
        mut names: Vec<String>,
    ) -> Result<Self> {
        let n = labels.len();
        Error::check_len(n * raw_dim, raw.len())?;
        if names.is_empty() {
            names = (0..raw_dim).map(|j| format!("x{}", j + 1)).collect();
        }
        Error::check_len(raw_dim, names.len())?;
        let features = homogeneous(raw, n, raw_dim);
        names.push(INTERCEPT_COLUMN.to_string());
        Dataset::new(features, raw_dim + 1, labels, task, names)
    }

    /// Wraps an already homogeneous feature matrix.
    pub fn new(
        features: Vec<f64>,
        k: usize,
        labels: Vec<f64>,
        task: Task,
        column_names: Vec<String>,
    ) -> Result<Self> {
        let n = labels.len();
        if k == 0 {
            return Err(Error::InvalidDataset("k must be at least 1".into()));
        }
        Error::check_len(n * k, features.len())?;
        Error::check_len(k, column_names.len())?;
        if n == 0 {
            return Err(Error::InvalidDataset("dataset has no rows".into()));
        }
        if let Some(i) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset(format!(
                "non-finite feature at row {}, column {}",
                i / k,
                i % k
            )));
        }
        if let Some(i) = (0..n).find(|i| features[i * k + k - 1] != 1.0) {
            return Err(Error::InvalidDataset(format!(
                "homogeneous column is not 1 at row {i}"
            )));
        }
        match task {
            Task::Classification => {
                if let Some(i) = labels.iter().position(|&y| y != 1.0 && y != -1.0) {
                    return Err(Error::InvalidDataset(format!(
                        "classification label {} at row {i} is not -1 or +1",
                        labels[i]
                    )));
                }
            }
            Task::Regression => {
                if let Some(i) = labels.iter().position(|y| !y.is_finite()) {
                    return Err(Error::InvalidDataset(format!("non-finite label at row {i}")));
                }
            }
        }
        Ok(Dataset {
            features,
            n,
            k,
            labels,
            groups: None,
            task,
            column_names,
        })
    }

    pub fn with_groups(mut self, groups: GroupAssignment) -> Result<Self> {
        Error::check_len(self.n, groups.len())?;
        self.groups = Some(groups);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of columns including the homogeneous one.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.k..(i + 1) * self.k]
    }

    pub fn rows(&self) -> core::slice::ChunksExact<'_, f64> {
        self.features.chunks_exact(self.k)
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn groups(&self) -> Option<&GroupAssignment> {
        self.groups.as_ref()
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    /// `theta . x_i` for every row.
    pub fn predict(&self, weights: &[f64]) -> Vec<f64> {
        self.rows().map(|x| math::dot(weights, x)).collect()
    }

    /// Rows selected by `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        let mut features = Vec::with_capacity(indices.len() * self.k);
        for &i in indices {
            features.extend_from_slice(self.row(i));
        }
        Dataset {
            features,
            n: indices.len(),
            k: self.k,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            groups: self.groups.as_ref().map(|g| g.subset(indices)),
            task: self.task,
            column_names: self.column_names.clone(),
        }
    }

    fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.rows().map(move |r| r[j])
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PreprocessConfig {
    /// Standardize non-binary feature columns to mean 0 and variance 1.
    pub standardize: bool,
    /// Columns (by index, homogeneous column excluded) never standardized.
    pub exempt: Vec<usize>,
    /// Negate the labels so that higher values are more desirable.
    pub flip_labels: bool,
    /// Divide regression labels by this constant.
    pub target_rescale: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preprocessed {
    pub dataset: Dataset,
    /// Columns left untouched because their variance is zero.
    pub zero_variance: Vec<usize>,
}

fn is_binary_column(dataset: &Dataset, j: usize) -> bool {
    dataset.column(j).all(|v| v == 0.0 || v == 1.0)
        || dataset.column(j).all(|v| v == -1.0 || v == 1.0)
}

/// Applies standardization, label rescaling and label flipping.
pub fn preprocess(dataset: &Dataset, config: &PreprocessConfig) -> Result<Preprocessed> {
    let mut out = dataset.clone();
    let mut zero_variance = Vec::new();
    if config.standardize {
        let n = out.n as f64;
        for j in 0..out.k - 1 {
            if config.exempt.contains(&j) || is_binary_column(dataset, j) {
                continue;
            }
            let mean = dataset.column(j).sum::<f64>() / n;
            let var = dataset.column(j).map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            if !(var > 0.0) {
                zero_variance.push(j);
                continue;
            }
            let sd = math::sqrt(var);
            for i in 0..out.n {
                let v = &mut out.features[i * out.k + j];
                *v = (*v - mean) / sd;
            }
        }
    }
    if let Some(d) = config.target_rescale {
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::param("target_rescale divisor must be > 0"));
        }
        if out.task == Task::Classification {
            return Err(Error::param("target_rescale applies to regression labels only"));
        }
        out.labels.iter_mut().for_each(|y| *y /= d);
    }
    if config.flip_labels {
        out.labels.iter_mut().for_each(|y| *y = -*y);
    }
    Ok(Preprocessed {
        dataset: out,
        zero_variance,
    })
}

fn normal_features(rng: &mut ChaCha8Rng, n: usize, raw_dim: usize) -> Vec<f64> {
    (0..n * raw_dim).map(|_| rng.sample(StandardNormal)).collect()
}

fn homogeneous(raw: &[f64], n: usize, raw_dim: usize) -> Vec<f64> {
    let mut f = Vec::with_capacity(n * (raw_dim + 1));
    for i in 0..n {
        f.extend_from_slice(&raw[i * raw_dim..(i + 1) * raw_dim]);
        f.push(1.0);
    }
    f
}

fn default_names(raw_dim: usize) -> Vec<String> {
    let mut names: Vec<String> = (0..raw_dim).map(|j| format!("x{}", j + 1)).collect();
    names.push(INTERCEPT_COLUMN.to_string());
    names
}

/// Realizable regression data: standard-normal features, weights uniform in
/// `[-theta_scale, theta_scale]`, labels exactly `theta* . x_i`.
pub fn gen_realizable(
    n: usize,
    k: usize,
    seed: u64,
    theta_scale: f64,
) -> Result<(Dataset, LinearModel)> {
    if n < 1 || k < 2 {
        return Err(Error::param("gen_realizable needs n >= 1 and k >= 2"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let theta: Vec<f64> = (0..k)
        .map(|_| rng.random_range(-theta_scale..=theta_scale))
        .collect();
    let raw = normal_features(&mut rng, n, k - 1);
    let features = homogeneous(&raw, n, k - 1);
    let labels = features.chunks_exact(k).map(|x| math::dot(&theta, x)).collect();
    let ds = Dataset::new(features, k, labels, Task::Regression, default_names(k - 1))?;
    Ok((ds, LinearModel::new(theta)?))
}

/// Options for [`gen_synthetic`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub task: Task,
    /// Standard deviation of the label noise (regression) or of the latent
    /// score noise (classification).
    pub noise: f64,
    /// Probability of membership in `G2`.
    pub group_share: f64,
    /// Shift of the first feature and of the latent score for `G2`.
    pub group_shift: f64,
}

impl SyntheticSpec {
    pub fn regression(n: usize, k: usize, seed: u64) -> Self {
        SyntheticSpec {
            n,
            k,
            seed,
            task: Task::Regression,
            noise: 0.3,
            group_share: 0.3,
            group_shift: -0.5,
        }
    }

    pub fn classification(n: usize, k: usize, seed: u64) -> Self {
        SyntheticSpec {
            task: Task::Classification,
            noise: 1.0,
            ..SyntheticSpec::regression(n, k, seed)
        }
    }
}

/// Noisy synthetic data with two groups. `G2` members have a shifted first
/// feature and a shifted latent score, so group metrics are non-trivial.
pub fn gen_synthetic(spec: &SyntheticSpec) -> Result<(Dataset, LinearModel)> {
    let SyntheticSpec { n, k, seed, .. } = *spec;
    if n < 2 || k < 2 {
        return Err(Error::param("gen_synthetic needs n >= 2 and k >= 2"));
    }
    if !(0.0..=1.0).contains(&spec.group_share) || !(spec.noise >= 0.0) {
        return Err(Error::param("group_share must be in [0,1] and noise >= 0"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut theta: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..=1.0)).collect();
    theta[k - 1] = 0.5;
    let mut raw = normal_features(&mut rng, n, k - 1);
    let flags: Vec<bool> = (0..n).map(|_| rng.random_bool(spec.group_share)).collect();
    for (i, &g2) in flags.iter().enumerate() {
        if g2 {
            raw[i * (k - 1)] += spec.group_shift;
        }
    }
    let features = homogeneous(&raw, n, k - 1);
    let labels: Vec<f64> = features
        .chunks_exact(k)
        .zip(&flags)
        .map(|(x, &g2)| {
            let eps: f64 = rng.sample(StandardNormal);
            let shift = if g2 { spec.group_shift } else { 0.0 };
            let latent = math::dot(&theta, x) + shift + spec.noise * eps;
            match spec.task {
                Task::Regression => latent,
                Task::Classification => {
                    if latent >= 0.0 {
                        1.0
                    } else {
                        -1.0
                    }
                }
            }
        })
        .collect();
    let ds = Dataset::new(features, k, labels, spec.task, default_names(k - 1))?
        .with_groups(GroupAssignment::from_flags(&flags))?;
    Ok((ds, LinearModel::new(theta)?))
}

/// Train/test index partition of one fold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Shuffled k-fold split; test folds are disjoint, cover `0..n` and differ
/// in size by at most one (larger folds first).
pub fn kfold_split(n: usize, folds: usize, seed: u64) -> Result<Vec<Fold>> {
    if folds < 2 {
        return Err(Error::param("folds must be at least 2"));
    }
    if folds > n {
        return Err(Error::TooFewRows { rows: n, folds });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (base, extra) = (n / folds, n % folds);
    let mut out = Vec::with_capacity(folds);
    let mut start = 0;
    for f in 0..folds {
        let size = base + usize::from(f < extra);
        let mut test = order[start..start + size].to_vec();
        test.sort_unstable();
        let mut train: Vec<usize> = order[..start]
            .iter()
            .chain(&order[start + size..])
            .copied()
            .collect();
        train.sort_unstable();
        out.push(Fold { train, test });
        start += size;
    }
    Ok(out)
}
