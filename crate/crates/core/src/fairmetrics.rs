//! Individual and group fairness measures over predictions.
//!
//! Classification predictions are signed scores; metrics that need hard
//! labels use `sign` with `sign(0) = +1`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::benefits::{build_profile, BenefitSpec, Positivity};
use crate::dataset::{Dataset, GroupAssignment, GroupId, Task};
use crate::error::{Error, Result};
use crate::math;
use crate::welfare::{self, WelfareParams};

/// Above this many points the distance matrix is not materialised and
/// entries are computed on demand.
pub const DEFAULT_DENSE_CAP: usize = 10_000;

/// Hard label of a signed score.
#[inline]
pub fn hard_label(score: f64) -> f64 {
    if score >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceMode {
    /// Euclidean distance between feature vectors divided by the largest
    /// pairwise distance (classification).
    NormalizedEuclidean,
    /// `|y_i - y_j|` (regression).
    LabelDistance,
}

impl DistanceMode {
    pub fn for_task(task: Task) -> Self {
        match task {
            Task::Classification => DistanceMode::NormalizedEuclidean,
            Task::Regression => DistanceMode::LabelDistance,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Storage {
    Dense(Vec<f64>),
    Points { points: Vec<f64>, dim: usize, scale: f64 },
    Labels(Vec<f64>),
}

/// Symmetric pairwise distance matrix, dense or computed lazily.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseDistances {
    n: usize,
    storage: Storage,
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    math::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

impl PairwiseDistances {
    /// Normalized Euclidean distances between the rows of `points`
    /// (`n x dim`, row-major).
    pub fn normalized_euclidean(points: &[f64], dim: usize, dense_cap: usize) -> Result<Self> {
        if dim == 0 || !points.len().is_multiple_of(dim) {
            return Err(Error::param("points length must be a multiple of dim"));
        }
        let n = points.len() / dim;
        if n < 2 {
            return Err(Error::param("pairwise distances need at least two points"));
        }
        let row = |i: usize| &points[i * dim..(i + 1) * dim];
        let mut max = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                max = max.max(euclid(row(i), row(j)));
            }
        }
        if !(max > 0.0) {
            return Err(Error::DegenerateData("all points are identical".into()));
        }
        let storage = if n <= dense_cap {
            let mut m = alloc::vec![0.0; n * n];
            for i in 0..n {
                for j in (i + 1)..n {
                    let d = euclid(row(i), row(j)) / max;
                    m[i * n + j] = d;
                    m[j * n + i] = d;
                }
            }
            Storage::Dense(m)
        } else {
            Storage::Points {
                points: points.to_vec(),
                dim,
                scale: max,
            }
        };
        Ok(PairwiseDistances { n, storage })
    }

    /// `|y_i - y_j|`.
    pub fn label_distance(labels: &[f64], dense_cap: usize) -> Result<Self> {
        let n = labels.len();
        if n < 2 {
            return Err(Error::param("pairwise distances need at least two points"));
        }
        let storage = if n <= dense_cap {
            let mut m = alloc::vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    m[i * n + j] = math::abs(labels[i] - labels[j]);
                }
            }
            Storage::Dense(m)
        } else {
            Storage::Labels(labels.to_vec())
        };
        Ok(PairwiseDistances { n, storage })
    }

    /// A caller-supplied `n x n` matrix; must be symmetric, non-negative and
    /// zero on the diagonal.
    pub fn from_matrix(n: usize, matrix: Vec<f64>) -> Result<Self> {
        Error::check_len(n * n, matrix.len())?;
        for i in 0..n {
            if matrix[i * n + i] != 0.0 {
                return Err(Error::param("distance matrix diagonal must be zero"));
            }
            for j in 0..n {
                let d = matrix[i * n + j];
                if !(d >= 0.0) || d != matrix[j * n + i] {
                    return Err(Error::param(
                        "distance matrix must be symmetric and non-negative",
                    ));
                }
            }
        }
        Ok(PairwiseDistances {
            n,
            storage: Storage::Dense(matrix),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.storage, Storage::Dense(_))
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match &self.storage {
            Storage::Dense(m) => m[i * self.n + j],
            Storage::Points { points, dim, scale } => {
                if i == j {
                    0.0
                } else {
                    euclid(
                        &points[i * dim..(i + 1) * dim],
                        &points[j * dim..(j + 1) * dim],
                    ) / scale
                }
            }
            Storage::Labels(y) => math::abs(y[i] - y[j]),
        }
    }
}

/// Distances for a dataset under the given mode. Normalized Euclidean
/// distances ignore the homogeneous column (it is constant).
pub fn pairwise_distances(dataset: &Dataset, mode: DistanceMode) -> Result<PairwiseDistances> {
    pairwise_distances_capped(dataset, mode, DEFAULT_DENSE_CAP)
}

pub fn pairwise_distances_capped(
    dataset: &Dataset,
    mode: DistanceMode,
    dense_cap: usize,
) -> Result<PairwiseDistances> {
    match mode {
        DistanceMode::LabelDistance => PairwiseDistances::label_distance(dataset.labels(), dense_cap),
        DistanceMode::NormalizedEuclidean => {
            let k = dataset.k();
            if k == 1 {
                return Err(Error::DegenerateData("no features besides the intercept".into()));
            }
            let mut pts = Vec::with_capacity(dataset.n() * (k - 1));
            for r in dataset.rows() {
                pts.extend_from_slice(&r[..k - 1]);
            }
            PairwiseDistances::normalized_euclidean(&pts, k - 1, dense_cap)
        }
    }
}

/// Average positive part of `|y_hat_i - y_hat_j| - d(i, j)` over unordered pairs.
pub fn dwork_violation(predictions: &[f64], distances: &PairwiseDistances) -> Result<f64> {
    let n = predictions.len();
    Error::check_len(distances.n(), n)?;
    if n < 2 {
        return Err(Error::param("dwork violation needs at least two predictions"));
    }
    let mut total = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            total += (math::abs(predictions[i] - predictions[j]) - distances.get(i, j)).max(0.0);
        }
    }
    Ok(2.0 * total / (n as f64 * (n as f64 - 1.0)))
}

/// Largest single pairwise violation (0 when every pair is satisfied).
pub fn max_pair_violation(predictions: &[f64], distances: &PairwiseDistances) -> Result<f64> {
    let n = predictions.len();
    Error::check_len(distances.n(), n)?;
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max(math::abs(predictions[i] - predictions[j]) - distances.get(i, j));
        }
    }
    Ok(worst)
}

fn group_mean(values: impl Iterator<Item = (f64, GroupId)>) -> [f64; 2] {
    let mut sum = [0.0; 2];
    let mut count = [0usize; 2];
    for (v, g) in values {
        let k = g as usize;
        sum[k] += v;
        count[k] += 1;
    }
    [sum[0] / count[0] as f64, sum[1] / count[1] as f64]
}

/// `|P(y_hat = 1 | G1) - P(y_hat = 1 | G2)|` on hard labels.
pub fn demographic_parity_diff(predictions: &[f64], groups: &GroupAssignment) -> Result<f64> {
    Error::check_len(groups.len(), predictions.len())?;
    groups.require_both()?;
    let m = group_mean(
        predictions
            .iter()
            .zip(groups.membership())
            .map(|(&p, &g)| (f64::from(hard_label(p) == 1.0), g)),
    );
    Ok(math::abs(m[0] - m[1]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorRateKind {
    /// `P(y_hat = 1 | y = -1)`.
    FalsePositive,
    /// `P(y_hat = -1 | y = 1)`.
    FalseNegative,
}

/// Absolute between-group difference of the false positive or false
/// negative rate. Labels must be `+-1`.
pub fn error_rate_diff(
    kind: ErrorRateKind,
    predictions: &[f64],
    labels: &[f64],
    groups: &GroupAssignment,
) -> Result<f64> {
    Error::check_len(labels.len(), predictions.len())?;
    Error::check_len(groups.len(), predictions.len())?;
    groups.require_both()?;
    let (given, wrong) = match kind {
        ErrorRateKind::FalsePositive => (-1.0, 1.0),
        ErrorRateKind::FalseNegative => (1.0, -1.0),
    };
    let mut hits = [0usize; 2];
    let mut base = [0usize; 2];
    for ((&p, &y), &g) in predictions.iter().zip(labels).zip(groups.membership()) {
        if y != 1.0 && y != -1.0 {
            return Err(Error::UnknownLabel(y));
        }
        if y == given {
            base[g as usize] += 1;
            if hard_label(p) == wrong {
                hits[g as usize] += 1;
            }
        }
    }
    for g in [GroupId::G1, GroupId::G2] {
        if base[g as usize] == 0 {
            return Err(Error::UndefinedRate {
                group: g.name(),
                label: given as i8,
            });
        }
    }
    let rate = |g: usize| hits[g] as f64 / base[g] as f64;
    Ok(math::abs(rate(0) - rate(1)))
}

/// `|mean(y_hat | G1) - mean(y_hat | G2)|`.
pub fn mean_diff(predictions: &[f64], groups: &GroupAssignment) -> Result<f64> {
    Error::check_len(groups.len(), predictions.len())?;
    groups.require_both()?;
    let m = group_mean(predictions.iter().copied().zip(groups.membership().iter().copied()));
    Ok(math::abs(m[0] - m[1]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualSign {
    /// Over-prediction `max(0, y_hat - y)`.
    Positive,
    /// Under-prediction `max(0, y - y_hat)`.
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualGap {
    pub value: f64,
    /// Per group (`G1`, `G2`): no member strictly over/under-predicted, so
    /// the group's term was taken as 0.
    pub zero_denominator: [bool; 2],
}

/// Between-group gap of mean residuals, each group normalized by its count
/// of strictly over- (or under-) predicted members.
pub fn residual_diff(
    sign: ResidualSign,
    predictions: &[f64],
    labels: &[f64],
    groups: &GroupAssignment,
) -> Result<ResidualGap> {
    Error::check_len(labels.len(), predictions.len())?;
    Error::check_len(groups.len(), predictions.len())?;
    groups.require_both()?;
    let mut sum = [0.0; 2];
    let mut count = [0usize; 2];
    for ((&p, &y), &g) in predictions.iter().zip(labels).zip(groups.membership()) {
        let r = match sign {
            ResidualSign::Positive => p - y,
            ResidualSign::Negative => y - p,
        };
        if r > 0.0 {
            sum[g as usize] += r;
            count[g as usize] += 1;
        }
    }
    let term = |g: usize| if count[g] == 0 { 0.0 } else { sum[g] / count[g] as f64 };
    Ok(ResidualGap {
        value: math::abs(term(0) - term(1)),
        zero_denominator: [count[0] == 0, count[1] == 0],
    })
}

/// What [`full_report`] measures and how.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportSpec {
    pub benefit: BenefitSpec,
    pub positivity: Positivity,
    /// Welfare risk parameter.
    pub alpha: f64,
    /// Atkinson inequality aversion.
    pub beta: f64,
    /// Generalized-entropy parameter.
    pub ge_alpha: f64,
    /// Defaults to the task's distance mode.
    pub distance: Option<DistanceMode>,
    pub dense_cap: usize,
}

impl ReportSpec {
    /// Welfare at `alpha`, Atkinson at `1 - alpha`, GE at 2, benefits
    /// floored at the default floor.
    pub fn for_task(task: Task, alpha: f64) -> Self {
        ReportSpec {
            benefit: match task {
                Task::Regression => BenefitSpec::regression(),
                Task::Classification => BenefitSpec::classification_default(),
            },
            positivity: Positivity::floor(),
            alpha,
            beta: 1.0 - alpha,
            ge_alpha: 2.0,
            distance: None,
            dense_cap: DEFAULT_DENSE_CAP,
        }
    }
}

/// Every measure for one set of predictions. Group metrics are `None` when
/// no groups are available or the metric is undefined; see `flags`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub task: Task,
    pub n: usize,
    /// Mean squared error (regression) or mean logistic loss (classification).
    pub loss: f64,
    /// Classification only.
    pub accuracy: Option<f64>,
    pub mean_benefit: f64,
    pub welfare: f64,
    pub atkinson: f64,
    pub ge: f64,
    pub dwork_violation: f64,
    pub demographic_parity: Option<f64>,
    pub fpr_diff: Option<f64>,
    pub fnr_diff: Option<f64>,
    pub mean_diff: Option<f64>,
    pub pos_residual_diff: Option<f64>,
    pub neg_residual_diff: Option<f64>,
    pub flags: Vec<String>,
}

/// Loss of `predictions` against the dataset labels for its task.
pub fn loss(task: Task, predictions: &[f64], labels: &[f64]) -> Result<f64> {
    Error::check_len(labels.len(), predictions.len())?;
    let n = predictions.len() as f64;
    Ok(match task {
        Task::Regression => {
            predictions.iter().zip(labels).map(|(p, y)| (p - y) * (p - y)).sum::<f64>() / n
        }
        Task::Classification => {
            predictions.iter().zip(labels).map(|(p, y)| math::softplus(-y * p)).sum::<f64>() / n
        }
    })
}

pub fn accuracy(predictions: &[f64], labels: &[f64]) -> Result<f64> {
    Error::check_len(labels.len(), predictions.len())?;
    let hits = predictions
        .iter()
        .zip(labels)
        .filter(|(p, y)| hard_label(**p) == **y)
        .count();
    Ok(hits as f64 / predictions.len() as f64)
}

/// Aggregates loss/accuracy, welfare, Atkinson, GE, Dwork violation and the
/// group metrics. Classification measures other than loss are evaluated on
/// hard labels.
pub fn full_report(
    dataset: &Dataset,
    predictions: &[f64],
    groups: Option<&GroupAssignment>,
    spec: &ReportSpec,
) -> Result<MetricsReport> {
    let labels = dataset.labels();
    Error::check_len(dataset.n(), predictions.len())?;
    let task = dataset.task();
    let mut flags = Vec::new();
    let outcomes: Vec<f64> = match task {
        Task::Regression => predictions.to_vec(),
        Task::Classification => predictions.iter().map(|&p| hard_label(p)).collect(),
    };
    let floored = outcomes
        .iter()
        .zip(labels)
        .filter(|(p, y)| spec.benefit.raw(**y, **p).is_ok_and(|b| b <= 0.0))
        .count();
    if floored > 0 {
        flags.push(format!("benefit_floored={floored}"));
    }
    let profile = build_profile(&outcomes, labels, &spec.benefit, spec.positivity)?;
    let distances = pairwise_distances_capped(
        dataset,
        spec.distance.unwrap_or(DistanceMode::for_task(task)),
        spec.dense_cap,
    )?;

    let mut report = MetricsReport {
        task,
        n: dataset.n(),
        loss: loss(task, predictions, labels)?,
        accuracy: match task {
            Task::Classification => Some(accuracy(predictions, labels)?),
            Task::Regression => None,
        },
        mean_benefit: profile.mean(),
        welfare: welfare::empirical_welfare(&profile, WelfareParams::mean(spec.alpha))?,
        atkinson: welfare::atkinson(&profile, spec.beta)?,
        ge: welfare::generalized_entropy(&profile, spec.ge_alpha)?,
        dwork_violation: dwork_violation(&outcomes, &distances)?,
        demographic_parity: None,
        fpr_diff: None,
        fnr_diff: None,
        mean_diff: None,
        pos_residual_diff: None,
        neg_residual_diff: None,
        flags,
    };

    let Some(groups) = groups.or(dataset.groups()) else {
        report.flags.push("no_groups".into());
        return Ok(report);
    };
    if let Err(e) = groups.require_both() {
        report.flags.push(format!("group_metrics_skipped: {e}"));
        return Ok(report);
    }
    if task == Task::Classification {
        report.demographic_parity = Some(demographic_parity_diff(&outcomes, groups)?);
        for (kind, slot, tag) in [
            (ErrorRateKind::FalsePositive, &mut report.fpr_diff, "fpr_diff"),
            (ErrorRateKind::FalseNegative, &mut report.fnr_diff, "fnr_diff"),
        ] {
            match error_rate_diff(kind, &outcomes, labels, groups) {
                Ok(v) => *slot = Some(v),
                Err(e @ Error::UndefinedRate { .. }) => report.flags.push(format!("{tag}: {e}")),
                Err(e) => return Err(e),
            }
        }
    }
    report.mean_diff = Some(mean_diff(&outcomes, groups)?);
    for (sign, tag) in [
        (ResidualSign::Positive, "pos_residual_diff"),
        (ResidualSign::Negative, "neg_residual_diff"),
    ] {
        let gap = residual_diff(sign, &outcomes, labels, groups)?;
        for (g, empty) in gap.zero_denominator.iter().enumerate() {
            if *empty {
                report.flags.push(format!("{tag}: G{} has no strict residuals", g + 1));
            }
        }
        match sign {
            ResidualSign::Positive => report.pos_residual_diff = Some(gap.value),
            ResidualSign::Negative => report.neg_residual_diff = Some(gap.value),
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    const B1: [f64; 4] = [0.6, 1.0, 1.0, 1.1];

    fn halves() -> GroupAssignment {
        GroupAssignment::from_flags(&[false, false, true, true])
    }

    fn zeros(n: usize) -> PairwiseDistances {
        PairwiseDistances::from_matrix(n, vec![0.0; n * n]).unwrap()
    }

    #[test]
    fn distance_examples() {
        let d = PairwiseDistances::label_distance(&[2.0, 2.0], 10).unwrap();
        assert_eq!((d.get(0, 1), d.get(1, 0), d.get(0, 0)), (0.0, 0.0, 0.0));
        let d = PairwiseDistances::label_distance(&[1.0; 4], 10).unwrap();
        assert!((0..4).all(|i| (0..4).all(|j| d.get(i, j) == 0.0)));
        let d = PairwiseDistances::normalized_euclidean(&[0.0, 1.0, 2.0], 1, 10).unwrap();
        assert_eq!(d.get(0, 2), 1.0);
        assert_eq!(d.get(0, 1), 0.5);
        assert_eq!(
            PairwiseDistances::normalized_euclidean(&[3.0, 3.0], 1, 10),
            Err(Error::DegenerateData("all points are identical".into()))
        );
    }

    #[test]
    fn lazy_distances_match_dense() {
        let pts = [0.0, 0.0, 3.0, 4.0, 1.0, 1.0, -2.0, 5.0];
        let dense = PairwiseDistances::normalized_euclidean(&pts, 2, 100).unwrap();
        let lazy = PairwiseDistances::normalized_euclidean(&pts, 2, 2).unwrap();
        assert!(dense.is_dense() && !lazy.is_dense());
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(dense.get(i, j), lazy.get(i, j));
            }
        }
        let y = [0.5, 1.0, -3.0];
        let dl = PairwiseDistances::label_distance(&y, 1).unwrap();
        assert_eq!(dl.get(1, 2), 4.0);
    }

    #[test]
    fn dwork_examples() {
        assert!((dwork_violation(&B1, &zeros(4)).unwrap() - 0.25).abs() < 1e-12);
        assert_eq!(dwork_violation(&[0.3; 5], &zeros(5)).unwrap(), 0.0);
        let d = PairwiseDistances::from_matrix(2, vec![0.0, 0.4, 0.4, 0.0]).unwrap();
        assert!((dwork_violation(&[0.0, 1.0], &d).unwrap() - 0.6).abs() < 1e-12);
        assert!(dwork_violation(&[0.0, 1.0, 2.0], &d).is_err());
    }

    #[test]
    fn demographic_parity_examples() {
        let g = halves();
        assert_eq!(demographic_parity_diff(&[1.0; 4], &g).unwrap(), 0.0);
        assert_eq!(demographic_parity_diff(&[1.0, 1.0, 1.0, -1.0], &g).unwrap(), 0.5);
        assert_eq!(demographic_parity_diff(&[-1.0, -1.0, 1.0, 1.0], &g).unwrap(), 1.0);
        // sign(0) = +1
        assert_eq!(demographic_parity_diff(&[0.0, 0.0, 1.0, 1.0], &g).unwrap(), 0.0);
        let one_sided = GroupAssignment::from_flags(&[false; 4]);
        assert_eq!(demographic_parity_diff(&[1.0; 4], &one_sided), Err(Error::EmptyGroup("G2")));
    }

    #[test]
    fn error_rate_examples() {
        let y = [-1.0, -1.0, 1.0, -1.0, 1.0];
        let g = GroupAssignment::from_flags(&[false, false, false, true, true]);
        assert_eq!(error_rate_diff(ErrorRateKind::FalsePositive, &y, &y, &g).unwrap(), 0.0);
        assert_eq!(error_rate_diff(ErrorRateKind::FalseNegative, &y, &y, &g).unwrap(), 0.0);
        // G1 negatives: one of two flagged positive; G2 negative: none
        let p = [1.0, -1.0, 1.0, -1.0, 1.0];
        assert_eq!(error_rate_diff(ErrorRateKind::FalsePositive, &p, &y, &g).unwrap(), 0.5);
        let all_pos = [1.0; 4];
        assert!(matches!(
            error_rate_diff(ErrorRateKind::FalsePositive, &all_pos, &all_pos, &halves()),
            Err(Error::UndefinedRate { label: -1, .. })
        ));
    }

    #[test]
    fn mean_and_residual_examples() {
        let g = halves();
        assert!((mean_diff(&B1, &g).unwrap() - 0.25).abs() < 1e-12);
        assert_eq!(mean_diff(&[0.4, 0.7, 0.4, 0.7], &g).unwrap(), 0.0);
        let g2 = GroupAssignment::from_flags(&[false, true]);
        assert_eq!(mean_diff(&[0.0, 1.0], &g2).unwrap(), 1.0);

        let ones = [1.0; 4];
        let neg = residual_diff(ResidualSign::Negative, &B1, &ones, &g).unwrap();
        assert!((neg.value - 0.4).abs() < 1e-12);
        assert_eq!(neg.zero_denominator, [false, true]);
        let pos = residual_diff(ResidualSign::Positive, &B1, &ones, &g).unwrap();
        // denominator is the count of over-predicted members, not |G|
        assert!((pos.value - 0.1).abs() < 1e-12);
        assert_eq!(pos.zero_denominator, [true, false]);
        for s in [ResidualSign::Positive, ResidualSign::Negative] {
            assert_eq!(residual_diff(s, &ones, &ones, &g).unwrap().value, 0.0);
        }
    }

    #[test]
    fn example_one_report() {
        let ds = Dataset::from_raw(&[1.0, 2.0, 3.0, 4.0], 1, vec![1.0; 4], Task::Regression, vec![])
            .unwrap()
            .with_groups(halves())
            .unwrap();
        let r = full_report(&ds, &B1, None, &ReportSpec::for_task(Task::Regression, 0.5)).unwrap();
        assert!((r.welfare - 0.9559).abs() < 1e-4);
        assert!((r.dwork_violation - 0.25).abs() < 1e-12);
        assert!((r.mean_diff.unwrap() - 0.25).abs() < 1e-12);
        assert!((r.neg_residual_diff.unwrap() - 0.4).abs() < 1e-12);
        assert!(r.accuracy.is_none() && r.demographic_parity.is_none());
    }

    #[test]
    fn perfect_regression_report() {
        let y = [0.2, -1.0, 0.7, 0.3, 0.9];
        let ds = Dataset::from_raw(&[0.0, 1.0, 2.0, 3.0, 4.0], 1, y.to_vec(), Task::Regression, vec![])
            .unwrap()
            .with_groups(GroupAssignment::from_flags(&[true, false, true, false, false]))
            .unwrap();
        let r = full_report(&ds, &y, None, &ReportSpec::for_task(Task::Regression, 0.5)).unwrap();
        assert_eq!(r.loss, 0.0);
        assert_eq!(r.welfare, 1.0);
        assert!(r.atkinson.abs() < 1e-12 && r.ge.abs() < 1e-12);
        assert_eq!(r.dwork_violation, 0.0);
        assert_eq!(r.pos_residual_diff, Some(0.0));
        assert_eq!(r.neg_residual_diff, Some(0.0));
    }

    #[test]
    fn report_without_groups_is_flagged() {
        let ds = Dataset::from_raw(&[0.0, 1.0], 1, vec![0.0, 1.0], Task::Regression, vec![]).unwrap();
        let r = full_report(&ds, &[0.0, 1.0], None, &ReportSpec::for_task(Task::Regression, 0.5)).unwrap();
        assert!(r.mean_diff.is_none());
        assert!(r.flags.iter().any(|f| f == "no_groups"));
    }

    #[test]
    fn report_matches_individual_calls() {
        use crate::dataset::{gen_synthetic, SyntheticSpec};
        use crate::welfare::{atkinson, empirical_welfare, generalized_entropy};
        for spec in [SyntheticSpec::regression(20, 3, 17), SyntheticSpec::classification(20, 3, 17)] {
            let (ds, theta) = gen_synthetic(&spec).unwrap();
            let pred = ds.predict(theta.weights());
            let rs = ReportSpec::for_task(ds.task(), 0.5);
            let r = full_report(&ds, &pred, None, &rs).unwrap();
            let g = ds.groups().unwrap();
            let y = ds.labels();
            let out: Vec<f64> = match ds.task() {
                Task::Regression => pred.clone(),
                Task::Classification => pred.iter().map(|&p| hard_label(p)).collect(),
            };
            let prof = build_profile(&out, y, &rs.benefit, rs.positivity).unwrap();
            let d = pairwise_distances(&ds, DistanceMode::for_task(ds.task())).unwrap();
            assert_eq!(r.loss, loss(ds.task(), &pred, y).unwrap());
            assert_eq!(r.welfare, empirical_welfare(&prof, WelfareParams::mean(0.5)).unwrap());
            assert_eq!(r.atkinson, atkinson(&prof, 0.5).unwrap());
            assert_eq!(r.ge, generalized_entropy(&prof, 2.0).unwrap());
            assert_eq!(r.dwork_violation, dwork_violation(&out, &d).unwrap());
            assert_eq!(r.mean_diff, Some(mean_diff(&out, g).unwrap()));
            assert_eq!(
                r.neg_residual_diff,
                Some(residual_diff(ResidualSign::Negative, &out, y, g).unwrap().value)
            );
            if ds.task() == Task::Classification {
                assert_eq!(r.demographic_parity, Some(demographic_parity_diff(&out, g).unwrap()));
                assert_eq!(r.accuracy, Some(accuracy(&pred, y).unwrap()));
                assert_eq!(
                    r.fpr_diff,
                    error_rate_diff(ErrorRateKind::FalsePositive, &out, y, g).ok()
                );
            }
        }
    }

    proptest! {
        #[test]
        fn dwork_is_translation_invariant(p in proptest::collection::vec(-2.0f64..2.0, 6), c in -3.0f64..3.0,
                                          y in proptest::collection::vec(-1.0f64..1.0, 6)) {
            let d = PairwiseDistances::label_distance(&y, 100).unwrap();
            // shift by a power of two so that every difference is exact
            let c = (c * 8.0).round() / 8.0;
            let shifted: Vec<f64> = p.iter().map(|v| v + c).collect();
            let a = dwork_violation(&p, &d).unwrap();
            let b = dwork_violation(&shifted, &d).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
            let spread = p.iter().cloned().fold(f64::MIN, f64::max) - p.iter().cloned().fold(f64::MAX, f64::min);
            prop_assert!(a >= 0.0 && a <= spread + 1e-12);
        }

        #[test]
        fn group_metrics_are_symmetric(p in proptest::collection::vec(-2.0f64..2.0, 8),
                                       y in proptest::collection::vec(prop::bool::ANY, 8),
                                       g in proptest::collection::vec(prop::bool::ANY, 8)) {
            let groups = GroupAssignment::from_flags(&g);
            prop_assume!(groups.require_both().is_ok());
            let sw = groups.swapped();
            let labels: Vec<f64> = y.iter().map(|&b| if b { 1.0 } else { -1.0 }).collect();
            let dp = demographic_parity_diff(&p, &groups).unwrap();
            prop_assert_eq!(dp, demographic_parity_diff(&p, &sw).unwrap());
            prop_assert!((0.0..=1.0).contains(&dp));
            prop_assert_eq!(mean_diff(&p, &groups).unwrap(), mean_diff(&p, &sw).unwrap());
            for s in [ResidualSign::Positive, ResidualSign::Negative] {
                prop_assert_eq!(residual_diff(s, &p, &labels, &groups).unwrap().value,
                                residual_diff(s, &p, &labels, &sw).unwrap().value);
            }
            for kind in [ErrorRateKind::FalsePositive, ErrorRateKind::FalseNegative] {
                if let Ok(v) = error_rate_diff(kind, &p, &labels, &groups) {
                    prop_assert!((0.0..=1.0).contains(&v));
                    prop_assert_eq!(v, error_rate_diff(kind, &p, &labels, &sw).unwrap());
                }
            }
        }
    }
}
