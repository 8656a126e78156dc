//! Heuristics that bound individual-fairness violations or inequality of a
//! least-squares predictor.
//!
//! * [`dwork_delta_mechanism`]: constrain the pairs that unconstrained ERM
//!   violates by at least `delta`.
//! * [`epsilon_net_mechanism`]: constrain every pair of an epsilon-net.
//! * [`speicher_mechanism`]: fix the mean benefit to each `mu` of a grid,
//!   bound the generalized entropy (order 2) and keep the cheapest `mu`.
//!
//! Pairwise constraints `|theta . (x_i - x_j)| <= d(i, j)` are enforced with
//! squared-hinge penalties whose weight grows tenfold per round.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::dataset::{Dataset, Task};
use crate::error::{Error, Result};
use crate::fairmetrics::{self, DistanceMode, PairwiseDistances};
use crate::math;
use crate::optim::{self, BisectionOptions, InnerOptions, Objective, PenalizedFamily};
use crate::solver::{self, LinearModel, SolveStatus, SolverConfig};

/// `|theta . x_i - theta . x_j| <= bound`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairConstraint {
    pub i: usize,
    pub j: usize,
    pub bound: f64,
}

impl PairConstraint {
    pub fn new(i: usize, j: usize, bound: f64) -> Result<Self> {
        if i >= j {
            return Err(Error::param(format!("pair ({i}, {j}) must have i < j")));
        }
        if !(bound >= 0.0) {
            return Err(Error::param("pair bound must be non-negative"));
        }
        Ok(PairConstraint { i, j, bound })
    }

    /// `|p_i - p_j| - bound`; positive when violated.
    pub fn violation(&self, predictions: &[f64]) -> f64 {
        math::abs(predictions[self.i] - predictions[self.j]) - self.bound
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MechanismConfig {
    pub solver: SolverConfig,
    /// Initial squared-hinge penalty weight.
    pub penalty: f64,
    pub penalty_growth: f64,
    pub penalty_rounds: usize,
    /// Read the generalized-entropy constraint as a lower bound, as literally
    /// written in the mechanism's description. Not convex; most grid values
    /// come out infeasible.
    pub literal_ge_lower_bound: bool,
}

impl Default for MechanismConfig {
    fn default() -> Self {
        MechanismConfig {
            solver: SolverConfig::default(),
            penalty: 10.0,
            penalty_growth: 10.0,
            penalty_rounds: 10,
            literal_ge_lower_bound: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MechanismResult {
    pub model: LinearModel,
    pub added_constraints: usize,
    /// Largest violation over the full constraint family: every pair for the
    /// pairwise mechanisms, mean equality and entropy bound for the
    /// grid mechanism.
    pub max_violation: f64,
    /// Average Dwork violation of unconstrained ERM and of the result
    /// (pairwise mechanisms only; 0 otherwise).
    pub avg_violation_initial: f64,
    pub avg_violation_final: f64,
    /// Largest violation among the constrained pairs.
    pub selected_max_violation: f64,
    pub status: SolveStatus,
    /// Penalty weight of the last round (pairwise mechanisms).
    pub penalty: f64,
    /// Chosen mean benefit and its generalized entropy (grid mechanism).
    pub mu: Option<f64>,
    pub ge2: Option<f64>,
    pub flags: Vec<String>,
}

fn require_regression(dataset: &Dataset) -> Result<()> {
    if dataset.task() != Task::Regression {
        return Err(Error::param("mechanisms operate on regression datasets"));
    }
    Ok(())
}

/// Least squares plus `rho * sum (|theta . (x_i - x_j)| - d)_+^2`.
struct PairPenalty<'a> {
    ds: &'a Dataset,
    pairs: &'a [PairConstraint],
    diffs: &'a [f64],
    rho: f64,
}

impl PairPenalty<'_> {
    fn excess(&self, theta: &[f64], p: usize) -> (f64, f64) {
        let k = self.ds.k();
        let s = math::dot(theta, &self.diffs[p * k..(p + 1) * k]);
        ((math::abs(s) - self.pairs[p].bound).max(0.0), if s >= 0.0 { 1.0 } else { -1.0 })
    }
}

impl Objective for PairPenalty<'_> {
    fn dim(&self) -> usize {
        self.ds.k()
    }

    fn value(&self, theta: &[f64]) -> Option<f64> {
        let loss: f64 = self
            .ds
            .rows()
            .zip(self.ds.labels())
            .map(|(x, y)| {
                let r = math::dot(theta, x) - y;
                r * r
            })
            .sum();
        let pen: f64 = (0..self.pairs.len()).map(|p| { let e = self.excess(theta, p).0; e * e }).sum();
        Some(loss + self.rho * pen)
    }

    fn gradient(&self, theta: &[f64], g: &mut [f64]) {
        let k = self.ds.k();
        g.iter_mut().for_each(|v| *v = 0.0);
        for (x, y) in self.ds.rows().zip(self.ds.labels()) {
            let c = 2.0 * (math::dot(theta, x) - y);
            g.iter_mut().zip(x).for_each(|(gi, xi)| *gi += c * xi);
        }
        for p in 0..self.pairs.len() {
            let (e, sign) = self.excess(theta, p);
            if e > 0.0 {
                let c = 2.0 * self.rho * e * sign;
                let d = &self.diffs[p * k..(p + 1) * k];
                g.iter_mut().zip(d).for_each(|(gi, di)| *gi += c * di);
            }
        }
    }

    fn hessian(&self, theta: &[f64], h: &mut [f64]) -> bool {
        let k = self.ds.k();
        h.iter_mut().for_each(|v| *v = 0.0);
        let mut add = |v: &[f64], c: f64| {
            for a in 0..k {
                for b in 0..k {
                    h[a * k + b] += c * v[a] * v[b];
                }
            }
        };
        self.ds.rows().for_each(|x| add(x, 2.0));
        for p in 0..self.pairs.len() {
            if self.excess(theta, p).0 > 0.0 {
                add(&self.diffs[p * k..(p + 1) * k], 2.0 * self.rho);
            }
        }
        true
    }
}

fn average_and_max(predictions: &[f64], distances: &PairwiseDistances) -> Result<(f64, f64)> {
    Ok((
        fairmetrics::dwork_violation(predictions, distances)?,
        fairmetrics::max_pair_violation(predictions, distances)?.max(0.0),
    ))
}

/// Least squares subject to the given pairwise constraints, by penalty
/// escalation until every constrained pair is within `tol_c`.
pub fn pairwise_constrained_erm(
    dataset: &Dataset,
    pairs: &[PairConstraint],
    distances: &PairwiseDistances,
    config: &MechanismConfig,
) -> Result<MechanismResult> {
    require_regression(dataset)?;
    Error::check_len(dataset.n(), distances.n())?;
    if pairs.iter().any(|p| p.j >= dataset.n()) {
        return Err(Error::param("pair index out of range"));
    }
    let erm = solver::solve_unconstrained(dataset, &config.solver)?;
    let initial = dataset.predict(erm.weights());
    let (avg_initial, _) = average_and_max(&initial, distances)?;
    let k = dataset.k();
    let mut diffs = Vec::with_capacity(pairs.len() * k);
    for p in pairs {
        let (a, b) = (dataset.row(p.i), dataset.row(p.j));
        diffs.extend(a.iter().zip(b).map(|(u, v)| u - v));
    }
    let tol_c = config.solver.tol_c;
    let selected_max = |pred: &[f64]| pairs.iter().map(|p| p.violation(pred)).fold(0.0, f64::max);

    let mut theta = erm.into_weights();
    let mut rho = config.penalty;
    let mut worst = selected_max(&initial);
    let mut rounds = 0;
    while worst > tol_c {
        if rounds == config.penalty_rounds {
            return Err(Error::NonConvergence {
                iterations: rounds,
                residual: worst,
            });
        }
        rounds += 1;
        let f = PairPenalty { ds: dataset, pairs, diffs: &diffs, rho };
        let opts = InnerOptions {
            tol_g: config.solver.tol_g,
            max_iter: config.solver.max_inner,
        };
        theta = optim::newton(&f, &theta, opts)?.x;
        worst = selected_max(&dataset.predict(&theta));
        if worst > tol_c {
            rho *= config.penalty_growth;
        }
    }
    let pred = dataset.predict(&theta);
    let (avg_final, max_final) = average_and_max(&pred, distances)?;
    Ok(MechanismResult {
        model: LinearModel::new(theta)?,
        added_constraints: pairs.len(),
        max_violation: max_final,
        avg_violation_initial: avg_initial,
        avg_violation_final: avg_final,
        selected_max_violation: worst,
        status: SolveStatus::Optimal,
        penalty: if rounds == 0 { 0.0 } else { rho },
        mu: None,
        ge2: None,
        flags: Vec::new(),
    })
}

/// Pairs that unconstrained ERM violates by at least `delta` (and by a
/// positive amount).
pub fn select_violated_pairs(
    predictions: &[f64],
    distances: &PairwiseDistances,
    delta: f64,
) -> Result<Vec<PairConstraint>> {
    Error::check_len(distances.n(), predictions.len())?;
    if !(delta >= 0.0) {
        return Err(Error::param("delta must be non-negative"));
    }
    let n = predictions.len();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let p = PairConstraint { i, j, bound: distances.get(i, j) };
            let v = p.violation(predictions);
            if v > 0.0 && v >= delta {
                pairs.push(p);
            }
        }
    }
    Ok(pairs)
}

/// Solve ERM, constrain the pairs it violates by at least `delta`, re-solve.
pub fn dwork_delta_mechanism(
    dataset: &Dataset,
    delta: f64,
    distances: &PairwiseDistances,
    config: &MechanismConfig,
) -> Result<MechanismResult> {
    require_regression(dataset)?;
    let erm = solver::solve_unconstrained(dataset, &config.solver)?;
    let pairs = select_violated_pairs(&dataset.predict(erm.weights()), distances, delta)?;
    pairwise_constrained_erm(dataset, &pairs, distances, config)
}

/// Greedy farthest-point traversal from point 0: repeatedly add the point
/// farthest from the current representatives until all are within `eps`.
pub fn epsilon_net_from(distances: &PairwiseDistances, eps: f64) -> Result<Vec<usize>> {
    if !(eps > 0.0) {
        return Err(Error::param("epsilon must be positive"));
    }
    let n = distances.n();
    let mut reps = vec![0];
    let mut nearest: Vec<f64> = (0..n).map(|i| distances.get(0, i)).collect();
    loop {
        let (far, d) = nearest
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &d)| if d > best.1 { (i, d) } else { best });
        if d <= eps {
            return Ok(reps);
        }
        reps.push(far);
        for (i, v) in nearest.iter_mut().enumerate() {
            *v = v.min(distances.get(far, i));
        }
    }
}

/// Epsilon-net of the feature vectors under normalized Euclidean distance.
pub fn epsilon_net(dataset: &Dataset, eps: f64) -> Result<Vec<usize>> {
    let d = fairmetrics::pairwise_distances(dataset, DistanceMode::NormalizedEuclidean)?;
    epsilon_net_from(&d, eps)
}

/// ERM constrained on every pair of an epsilon-net of the data. The net is
/// built under normalized Euclidean distance; constraint bounds come from
/// `distances`.
pub fn epsilon_net_mechanism(
    dataset: &Dataset,
    eps: f64,
    distances: &PairwiseDistances,
    config: &MechanismConfig,
) -> Result<MechanismResult> {
    require_regression(dataset)?;
    let mut reps = epsilon_net(dataset, eps)?;
    reps.sort_unstable();
    let mut pairs = Vec::with_capacity(reps.len() * reps.len().saturating_sub(1) / 2);
    for (a, &i) in reps.iter().enumerate() {
        for &j in &reps[a + 1..] {
            pairs.push(PairConstraint { i, j, bound: distances.get(i, j) });
        }
    }
    pairwise_constrained_erm(dataset, &pairs, distances, config)
}

/// Generalized entropy of order 2 of arbitrary-sign benefits around their
/// own mean.
fn ge2_of(benefits: &[f64]) -> f64 {
    let n = benefits.len() as f64;
    let mu = benefits.iter().sum::<f64>() / n;
    let sq: f64 = benefits.iter().map(|b| b * b).sum();
    0.5 * (sq / (n * mu * mu) - 1.0)
}

/// `sum r^2 + s * nu * sum b^2 + eta * h + rho / 2 * h^2` with
/// `h = sum r - n (mu - 1)`, `b = r + 1` and `s = +-1`.
struct SpeicherLagrangian<'a> {
    ds: &'a Dataset,
    mu: f64,
    nu: f64,
    sign: f64,
    eta: f64,
    rho: f64,
}

impl SpeicherLagrangian<'_> {
    fn residuals(&self, theta: &[f64]) -> Vec<f64> {
        self.ds.rows().zip(self.ds.labels()).map(|(x, y)| math::dot(theta, x) - y).collect()
    }

    fn equality(&self, r: &[f64]) -> f64 {
        r.iter().sum::<f64>() - self.ds.n() as f64 * (self.mu - 1.0)
    }
}

impl Objective for SpeicherLagrangian<'_> {
    fn dim(&self) -> usize {
        self.ds.k()
    }

    fn value(&self, theta: &[f64]) -> Option<f64> {
        let r = self.residuals(theta);
        let h = self.equality(&r);
        let quad: f64 = r.iter().map(|v| v * v).sum();
        let bsq: f64 = r.iter().map(|v| (v + 1.0) * (v + 1.0)).sum();
        Some(quad + self.sign * self.nu * bsq + self.eta * h + 0.5 * self.rho * h * h)
    }

    fn gradient(&self, theta: &[f64], g: &mut [f64]) {
        let r = self.residuals(theta);
        let common = self.eta + self.rho * self.equality(&r);
        g.iter_mut().for_each(|v| *v = 0.0);
        for (x, ri) in self.ds.rows().zip(&r) {
            let c = 2.0 * ri + 2.0 * self.sign * self.nu * (ri + 1.0) + common;
            g.iter_mut().zip(x).for_each(|(gi, xi)| *gi += c * xi);
        }
    }

    fn hessian(&self, _theta: &[f64], h: &mut [f64]) -> bool {
        let k = self.ds.k();
        h.iter_mut().for_each(|v| *v = 0.0);
        let mut col = vec![0.0; k];
        let c = 2.0 * (1.0 + self.sign * self.nu);
        for x in self.ds.rows() {
            for a in 0..k {
                col[a] += x[a];
                for b in 0..k {
                    h[a * k + b] += c * x[a] * x[b];
                }
            }
        }
        for a in 0..k {
            for b in 0..k {
                h[a * k + b] += self.rho * col[a] * col[b];
            }
        }
        true
    }
}

struct SpeicherFamily<'a> {
    ds: &'a Dataset,
    mu: f64,
    tau: f64,
    sign: f64,
    tol_c: f64,
    opts: InnerOptions,
}

impl SpeicherFamily<'_> {
    fn benefits(&self, theta: &[f64]) -> Vec<f64> {
        self.ds.rows().zip(self.ds.labels()).map(|(x, y)| math::dot(theta, x) - y + 1.0).collect()
    }
}

impl PenalizedFamily for SpeicherFamily<'_> {
    /// Augmented Lagrangian on the mean equality for a fixed inequality
    /// multiplier `nu`.
    fn minimize(&mut self, nu: f64, warm: &[f64]) -> Result<Vec<f64>> {
        let n = self.ds.n() as f64;
        let mut lag = SpeicherLagrangian {
            ds: self.ds,
            mu: self.mu,
            nu,
            sign: self.sign,
            eta: 0.0,
            rho: 10.0,
        };
        let mut theta = warm.to_vec();
        let mut last = f64::INFINITY;
        for _ in 0..60 {
            let m = optim::newton(&lag, &theta, self.opts)?;
            theta = m.x;
            let h = lag.equality(&lag.residuals(&theta));
            if math::abs(h) <= 1e-3 * self.tol_c * n {
                return Ok(theta);
            }
            lag.eta += lag.rho * h;
            if math::abs(h) > 0.25 * last {
                lag.rho *= 10.0;
            }
            last = math::abs(h);
        }
        Err(Error::NonConvergence { iterations: 60, residual: last / n })
    }

    fn slack(&self, theta: &[f64]) -> f64 {
        let ge = ge2_of(&self.benefits(theta));
        // within tol_c of the bound counts as satisfied
        self.sign * (self.tau - ge) + self.tol_c
    }
}

/// The default grid: 21 evenly spaced values spanning `[0.5, 1.5]` times the
/// mean benefit of unconstrained least squares.
pub fn default_mu_grid(dataset: &Dataset, config: &SolverConfig) -> Result<Vec<f64>> {
    require_regression(dataset)?;
    let erm = solver::solve_unconstrained(dataset, config)?;
    let pred = dataset.predict(erm.weights());
    let mean = pred.iter().zip(dataset.labels()).map(|(p, y)| p - y + 1.0).sum::<f64>()
        / dataset.n() as f64;
    Ok((0..21).map(|i| mean * (0.5 + i as f64 / 20.0)).collect())
}

/// For every `mu` in the grid: least squares with mean benefit `mu` and
/// generalized entropy (order 2) at most `tau`. Returns the feasible `mu`
/// with the smallest loss; infeasible grid values are listed in `flags`.
pub fn speicher_mechanism(
    dataset: &Dataset,
    tau: f64,
    mu_grid: &[f64],
    config: &MechanismConfig,
) -> Result<MechanismResult> {
    require_regression(dataset)?;
    if mu_grid.is_empty() {
        return Err(Error::param("mu grid is empty"));
    }
    if let Some(mu) = mu_grid.iter().find(|m| !(**m > 0.0 && m.is_finite())) {
        return Err(Error::param(format!("mu values must be positive, got {mu}")));
    }
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::param("tau must be non-negative"));
    }
    let sc = &config.solver;
    let sign = if config.literal_ge_lower_bound { -1.0 } else { 1.0 };
    let opts = BisectionOptions {
        lambda_max: if config.literal_ge_lower_bound { 1.0 - 1e-9 } else { sc.lambda_max },
        max_outer: sc.max_outer,
        ..Default::default()
    };
    let erm = solver::solve_unconstrained(dataset, sc)?.into_weights();
    let n = dataset.n() as f64;
    let mut flags = Vec::new();
    let mut best: Option<(f64, f64, Vec<f64>, f64)> = None;
    for &mu in mu_grid {
        let mut fam = SpeicherFamily {
            ds: dataset,
            mu,
            tau,
            sign,
            tol_c: sc.tol_c,
            opts: InnerOptions {
                tol_g: sc.tol_g,
                max_iter: sc.max_inner,
            },
        };
        // With the mean pinned at mu, GE2 is increasing and affine in the
        // squared loss, so the upper bound holds somewhere iff it holds at
        // the mean-constrained least-squares fit.
        let solved = if sign > 0.0 {
            fam.minimize(0.0, &erm).and_then(|x| {
                if fam.slack(&x) >= 0.0 {
                    Ok(x)
                } else {
                    Err(Error::LambdaOverflow { lambda_max: 0.0 })
                }
            })
        } else {
            optim::dual_bisection(&mut fam, &erm, opts).map(|s| s.x)
        };
        let x = match solved {
            Ok(x) => x,
            Err(Error::LambdaOverflow { .. }) => {
                flags.push(format!("infeasible_mu={mu}"));
                continue;
            }
            Err(Error::NonConvergence { .. }) => {
                flags.push(format!("nonconvergent_mu={mu}"));
                continue;
            }
            Err(e) => return Err(e),
        };
        let loss = solver::mean_loss(dataset, &x);
        if best.as_ref().is_none_or(|b| loss < b.0) {
            let ge = ge2_of(&fam.benefits(&x));
            best = Some((loss, mu, x, ge));
        }
    }
    let Some((_, mu, theta, ge)) = best else {
        return Err(Error::AllInfeasible);
    };
    let mean = dataset.predict(&theta).iter().zip(dataset.labels()).map(|(p, y)| p - y + 1.0).sum::<f64>() / n;
    let bound_violation = (sign * (ge - tau)).max(0.0);
    Ok(MechanismResult {
        model: LinearModel::new(theta)?,
        added_constraints: 2,
        max_violation: math::abs(mean - mu).max(bound_violation),
        avg_violation_initial: 0.0,
        avg_violation_final: 0.0,
        selected_max_violation: bound_violation,
        status: SolveStatus::Optimal,
        penalty: 0.0,
        mu: Some(mu),
        ge2: Some(ge),
        flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{gen_synthetic, SyntheticSpec};
    use alloc::vec;

    fn line(x: &[f64], y: &[f64]) -> Dataset {
        Dataset::from_raw(x, 1, y.to_vec(), Task::Regression, vec![]).unwrap()
    }

    fn labels_of(ds: &Dataset) -> PairwiseDistances {
        fairmetrics::pairwise_distances(ds, DistanceMode::LabelDistance).unwrap()
    }

    #[test]
    fn huge_delta_is_identity() {
        let ds = line(&[0.0, 1.0, 2.0, 3.0], &[0.0, 2.0, 1.0, 3.5]);
        let d = labels_of(&ds);
        let r = dwork_delta_mechanism(&ds, f64::INFINITY, &d, &MechanismConfig::default()).unwrap();
        let erm = solver::solve_unconstrained(&ds, &SolverConfig::default()).unwrap();
        assert_eq!(r.added_constraints, 0);
        assert_eq!(r.model, erm);
        assert_eq!(r.avg_violation_initial, r.avg_violation_final);
    }

    #[test]
    fn three_point_instance_one_pair() {
        // ERM predicts (0.614, 1.157, 1.429); pair (0, 2) has label gap 0.2
        let xs = [0.0, 2.0, 3.0];
        let ys = [0.0, 3.0, 0.2];
        let ds = line(&xs, &ys);
        let d = labels_of(&ds);
        let erm = solver::solve_unconstrained(&ds, &SolverConfig::default()).unwrap();
        let pairs = select_violated_pairs(&ds.predict(erm.weights()), &d, 0.0).unwrap();
        assert_eq!(pairs.len(), 1);
        assert_eq!((pairs[0].i, pairs[0].j), (0, 2));
        let r = dwork_delta_mechanism(&ds, 0.0, &d, &MechanismConfig::default()).unwrap();
        assert_eq!(r.added_constraints, 1);
        assert!(r.avg_violation_final < r.avg_violation_initial);
        assert!(r.selected_max_violation <= 1e-6);
        // grid oracle over slope and intercept with |3 * slope| <= 0.2
        let mut best = f64::INFINITY;
        for a in 0..=400 {
            let s = (-0.2 + 0.4 * a as f64 / 400.0) / 3.0;
            for b in 0..=2000 {
                let c = -1.0 + 3.0 * b as f64 / 2000.0;
                let l: f64 = xs.iter().zip(&ys).map(|(x, y)| (s * x + c - y) * (s * x + c - y)).sum();
                best = best.min(l);
            }
        }
        assert!((solver::mean_loss(&ds, r.model.weights()) * 3.0 - best).abs() < 1e-3);
    }

    #[test]
    fn delta_zero_satisfies_selected_pairs() {
        let (ds, _) = gen_synthetic(&SyntheticSpec::regression(40, 3, 2)).unwrap();
        let d = labels_of(&ds);
        let r = dwork_delta_mechanism(&ds, 0.0, &d, &MechanismConfig::default()).unwrap();
        assert!(r.added_constraints > 0);
        assert!(r.selected_max_violation <= 1e-6);
        assert!(r.avg_violation_final < r.avg_violation_initial);
    }

    #[test]
    fn added_constraints_shrink_with_delta() {
        let (ds, _) = gen_synthetic(&SyntheticSpec::regression(30, 3, 6)).unwrap();
        let d = labels_of(&ds);
        let erm = solver::solve_unconstrained(&ds, &SolverConfig::default()).unwrap();
        let pred = ds.predict(erm.weights());
        let mut prev = usize::MAX;
        for delta in [0.0, 0.05, 0.1, 0.2, 0.5, 1.0, 10.0] {
            let c = select_violated_pairs(&pred, &d, delta).unwrap().len();
            assert!(c <= prev);
            prev = c;
        }
    }

    fn square() -> Dataset {
        line_2d(&[0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0], &[0.0, 1.0, 1.0, 2.0])
    }

    fn line_2d(x: &[f64], y: &[f64]) -> Dataset {
        Dataset::from_raw(x, 2, y.to_vec(), Task::Regression, vec![]).unwrap()
    }

    #[test]
    fn epsilon_net_examples() {
        let ds = square();
        let reps = epsilon_net(&ds, 0.9).unwrap();
        assert_eq!(reps, vec![0, 3]);
        assert_eq!(epsilon_net(&ds, 1.0).unwrap(), vec![0]);
        let mut all = epsilon_net(&ds, 1e-9).unwrap();
        all.sort_unstable();
        assert_eq!(all, vec![0, 1, 2, 3]);
        assert!(epsilon_net(&ds, 0.0).is_err());
    }

    #[test]
    fn epsilon_net_cover_and_separation() {
        let (ds, _) = gen_synthetic(&SyntheticSpec::regression(60, 3, 1)).unwrap();
        let d = fairmetrics::pairwise_distances(&ds, DistanceMode::NormalizedEuclidean).unwrap();
        for eps in [0.05, 0.2, 0.5] {
            let reps = epsilon_net_from(&d, eps).unwrap();
            for i in 0..ds.n() {
                assert!(reps.iter().map(|&r| d.get(r, i)).fold(f64::INFINITY, f64::min) <= eps);
            }
            for (a, &i) in reps.iter().enumerate() {
                for &j in &reps[a + 1..] {
                    assert!(d.get(i, j) > eps);
                }
            }
        }
    }

    #[test]
    fn epsilon_net_mechanism_examples() {
        let ds = square();
        let d = labels_of(&ds);
        let cfg = MechanismConfig::default();
        let single = epsilon_net_mechanism(&ds, 2.0, &d, &cfg).unwrap();
        assert_eq!(single.added_constraints, 0);
        let r = epsilon_net_mechanism(&ds, 0.9, &d, &cfg).unwrap();
        assert_eq!(r.added_constraints, 1);
        assert!(r.selected_max_violation <= 1e-6);

        let five = line(&[0.0, 1.0, 2.0, 3.0, 4.0], &[0.0, 1.5, 0.5, 2.5, 1.0]);
        let d5 = labels_of(&five);
        let net = epsilon_net_mechanism(&five, 1e-9, &d5, &cfg).unwrap();
        let mut all = Vec::new();
        for i in 0..5 {
            for j in (i + 1)..5 {
                all.push(PairConstraint::new(i, j, d5.get(i, j)).unwrap());
            }
        }
        let direct = pairwise_constrained_erm(&five, &all, &d5, &cfg).unwrap();
        assert_eq!(net.added_constraints, 10);
        for (a, b) in net.model.weights().iter().zip(direct.model.weights()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn speicher_non_binding_is_mean_constrained_least_squares() {
        let (ds, _) = gen_synthetic(&SyntheticSpec::regression(50, 3, 3)).unwrap();
        let r = speicher_mechanism(&ds, 1e6, &[0.8, 1.0, 1.2], &MechanismConfig::default()).unwrap();
        // with an intercept, least squares already has mean benefit 1
        assert_eq!(r.mu, Some(1.0));
        let erm = solver::solve_unconstrained(&ds, &SolverConfig::default()).unwrap();
        for (a, b) in r.model.weights().iter().zip(erm.weights()) {
            assert!((a - b).abs() < 1e-6);
        }
        assert!(r.max_violation <= 1e-6);
    }

    #[test]
    fn speicher_equality_oracle_by_elimination() {
        // mean benefit fixed at 1.2: for an intercept model the optimum is
        // the least-squares fit shifted by 0.2
        let (ds, _) = gen_synthetic(&SyntheticSpec::regression(30, 3, 4)).unwrap();
        let r = speicher_mechanism(&ds, 1e6, &[1.2], &MechanismConfig::default()).unwrap();
        let mut w = solver::solve_unconstrained(&ds, &SolverConfig::default()).unwrap().into_weights();
        *w.last_mut().unwrap() += 0.2;
        for (a, b) in r.model.weights().iter().zip(&w) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn speicher_zero_tau_needs_equal_benefits() {
        let ds = line(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]);
        let r = speicher_mechanism(&ds, 0.0, &[1.5], &MechanismConfig::default()).unwrap();
        let p = ds.predict(r.model.weights());
        for (pi, yi) in p.iter().zip(ds.labels()) {
            assert!((pi - yi + 1.0 - 1.5).abs() < 1e-6);
        }
        let noisy = line(&[0.0, 1.0, 2.0], &[1.0, 3.5, 5.0]);
        assert_eq!(
            speicher_mechanism(&noisy, 0.0, &[1.0, 1.5], &MechanismConfig::default()),
            Err(Error::AllInfeasible)
        );
    }

    #[test]
    fn speicher_two_point_grid_oracle() {
        let ds = line(&[0.0, 1.0], &[0.3, 1.1]);
        let tau = 0.05;
        let r = speicher_mechanism(&ds, tau, &[1.0], &MechanismConfig::default()).unwrap();
        let mut best = f64::INFINITY;
        let steps = 2000;
        for a in 0..=steps {
            let s = -3.0 + 6.0 * a as f64 / steps as f64;
            // mean equality pins the intercept given the slope
            let c = (0.3 + 1.1) / 2.0 - s / 2.0;
            let b = [c - 0.3 + 1.0, s + c - 1.1 + 1.0];
            if ge2_of(&b) <= tau {
                best = best.min((b[0] - 1.0).powi(2) + (b[1] - 1.0).powi(2));
            }
        }
        let got = solver::mean_loss(&ds, r.model.weights()) * 2.0;
        assert!((got - best).abs() < 1e-3, "{got} vs {best}");
    }

    #[test]
    fn speicher_literal_reading_flags_grid() {
        let (ds, _) = gen_synthetic(&SyntheticSpec::regression(30, 3, 4)).unwrap();
        let cfg = MechanismConfig { literal_ge_lower_bound: true, ..Default::default() };
        // least squares already has entropy above a tiny bound
        let r = speicher_mechanism(&ds, 1e-6, &[1.0], &cfg).unwrap();
        assert!(r.ge2.unwrap() >= 1e-6);
        assert_eq!(speicher_mechanism(&ds, 1e3, &[1.0], &cfg), Err(Error::AllInfeasible));
    }

    #[test]
    fn default_grid_spans_half_to_one_and_a_half() {
        let (ds, _) = gen_synthetic(&SyntheticSpec::regression(30, 3, 4)).unwrap();
        let g = default_mu_grid(&ds, &SolverConfig::default()).unwrap();
        assert_eq!(g.len(), 21);
        assert!((g[0] - 0.5).abs() < 1e-9 && (g[20] - 1.5).abs() < 1e-9 && (g[10] - 1.0).abs() < 1e-9);
    }
}
