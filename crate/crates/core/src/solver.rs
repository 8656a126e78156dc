//! Welfare-constrained empirical risk minimisation for linear predictors.
//!
//! Regression solves
//!
//! ```text
//! min  sum_i (theta . x_i - y_i)^2
//! s.t. sum_i (theta . x_i - y_i + 1)^alpha >= tau * n
//! ```
//!
//! by bisection on the single multiplier `lambda` (in the summed units above)
//! with a damped Newton inner solve, followed by a joint Newton polish of the
//! KKT system. The problem is convex, so the result is certified by its KKT
//! residuals.
//!
//! Classification minimises mean logistic loss over unit-norm `theta` subject
//! to mean welfare of `b(y_i, theta . x_i / c)` being at least `tau`
//! (`lambda` in mean units). The sphere makes this non-convex; the best of
//! several projected-gradient restarts is returned and never certified.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::benefits::{Affine, BenefitSpec};
use crate::dataset::{Dataset, Task};
use crate::error::{Error, Result};
use crate::math;
use crate::optim::{self, BisectionOptions, InnerOptions, Objective, PenalizedFamily};

/// Weights of a linear predictor; the last coordinate multiplies the
/// homogeneous feature and is the intercept.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    weights: Vec<f64>,
}

impl LinearModel {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::param("a model needs at least one weight"));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite()) {
            return Err(Error::param(format!("non-finite weight {w}")));
        }
        Ok(LinearModel { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.weights
    }

    pub fn k(&self) -> usize {
        self.weights.len()
    }

    pub fn intercept(&self) -> f64 {
        self.weights[self.weights.len() - 1]
    }

    pub fn norm(&self) -> f64 {
        math::norm(&self.weights)
    }

    /// `theta . x_i` for every row.
    pub fn predict(&self, dataset: &Dataset) -> Result<Vec<f64>> {
        Error::check_len(dataset.k(), self.k())?;
        Ok(dataset.predict(&self.weights))
    }
}

/// The welfare constraint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintSpec {
    /// Utility exponent, in `(0, 1)`.
    pub alpha: f64,
    /// Lower bound on mean welfare.
    pub tau: f64,
    /// Classification scores enter the benefit as `theta . x / scale_c`.
    pub scale_c: f64,
    pub benefit: BenefitSpec,
}

impl ConstraintSpec {
    pub fn regression(alpha: f64, tau: f64) -> Self {
        ConstraintSpec {
            alpha,
            tau,
            scale_c: 5.0,
            benefit: BenefitSpec::regression(),
        }
    }

    pub fn classification(alpha: f64, tau: f64) -> Self {
        ConstraintSpec {
            benefit: BenefitSpec::classification_default(),
            ..ConstraintSpec::regression(alpha, tau)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::UnsupportedAlpha(self.alpha));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::param(format!("tau must be positive, got {}", self.tau)));
        }
        if !(self.scale_c > 0.0 && self.scale_c.is_finite()) {
            return Err(Error::param(format!("scale_c must be positive, got {}", self.scale_c)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub tol_c: f64,
    /// Inner gradient tolerance, relative to `1 + |grad L(0)|`.
    pub tol_g: f64,
    pub lambda_max: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    pub benefit_floor: f64,
    /// Classification restarts.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol_c: 1e-6,
            tol_g: 1e-8,
            lambda_max: 1e12,
            max_outer: 200,
            max_inner: 10_000,
            benefit_floor: crate::DEFAULT_BENEFIT_FLOOR,
            restarts: 8,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.tol_c, self.tol_g, self.lambda_max, self.benefit_floor];
        if positive.iter().any(|v| !(*v > 0.0)) || self.max_outer == 0 || self.max_inner == 0 {
            return Err(Error::param("solver tolerances and budgets must be positive"));
        }
        if self.restarts == 0 {
            return Err(Error::param("at least one restart is required"));
        }
        Ok(())
    }

    fn bisection(&self) -> BisectionOptions {
        BisectionOptions {
            lambda_max: self.lambda_max,
            max_outer: self.max_outer,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    MaxIter,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::MaxIter => "max_iter",
        }
    }
}

impl core::str::FromStr for SolveStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "optimal" => Ok(SolveStatus::Optimal),
            "infeasible" => Ok(SolveStatus::Infeasible),
            "max_iter" => Ok(SolveStatus::MaxIter),
            other => Err(Error::param(format!("unknown solve status {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub model: LinearModel,
    /// Dual multiplier; summed units for regression, mean units for
    /// classification.
    pub lambda: f64,
    /// Mean welfare at the solution.
    pub constraint_value: f64,
    /// Mean squared error or mean logistic loss at the solution.
    pub loss: f64,
    pub active: bool,
    pub status: SolveStatus,
    /// KKT residuals verified (regression only).
    pub certified: bool,
    /// Outer (multiplier) iterations.
    pub iterations: usize,
    pub inner_gradient_norm: f64,
}

/// Least squares (summed) or mean logistic loss, no constraint.
struct Loss<'a> {
    ds: &'a Dataset,
}

impl Objective for Loss<'_> {
    fn dim(&self) -> usize {
        self.ds.k()
    }

    fn value(&self, theta: &[f64]) -> Option<f64> {
        let it = self.ds.rows().zip(self.ds.labels());
        Some(match self.ds.task() {
            Task::Regression => it.map(|(x, y)| sq(math::dot(theta, x) - y)).sum(),
            Task::Classification => {
                it.map(|(x, y)| math::softplus(-y * math::dot(theta, x))).sum::<f64>()
                    / self.ds.n() as f64
            }
        })
    }

    fn gradient(&self, theta: &[f64], g: &mut [f64]) {
        loss_gradient(self.ds, theta, g);
    }

    fn hessian(&self, theta: &[f64], h: &mut [f64]) -> bool {
        loss_hessian(self.ds, theta, h);
        true
    }
}

#[inline]
fn sq(v: f64) -> f64 {
    v * v
}

fn axpy(out: &mut [f64], a: f64, x: &[f64]) {
    for (o, v) in out.iter_mut().zip(x) {
        *o += a * v;
    }
}

fn outer_add(h: &mut [f64], a: f64, x: &[f64]) {
    let k = x.len();
    for i in 0..k {
        let ai = a * x[i];
        for j in 0..k {
            h[i * k + j] += ai * x[j];
        }
    }
}

fn loss_gradient(ds: &Dataset, theta: &[f64], g: &mut [f64]) {
    g.iter_mut().for_each(|v| *v = 0.0);
    match ds.task() {
        Task::Regression => {
            for (x, y) in ds.rows().zip(ds.labels()) {
                axpy(g, 2.0 * (math::dot(theta, x) - y), x);
            }
        }
        Task::Classification => {
            let inv = 1.0 / ds.n() as f64;
            for (x, y) in ds.rows().zip(ds.labels()) {
                axpy(g, -y * math::sigmoid(-y * math::dot(theta, x)) * inv, x);
            }
        }
    }
}

fn loss_hessian(ds: &Dataset, theta: &[f64], h: &mut [f64]) {
    h.iter_mut().for_each(|v| *v = 0.0);
    match ds.task() {
        Task::Regression => ds.rows().for_each(|x| outer_add(h, 2.0, x)),
        Task::Classification => {
            let inv = 1.0 / ds.n() as f64;
            for x in ds.rows() {
                let s = math::sigmoid(math::dot(theta, x));
                outer_add(h, s * (1.0 - s) * inv, x);
            }
        }
    }
}

fn gradient_scale(ds: &Dataset) -> f64 {
    let mut g = vec![0.0; ds.k()];
    loss_gradient(ds, &vec![0.0; ds.k()], &mut g);
    1.0 + math::norm(&g)
}

/// Mean squared error or mean logistic loss of `theta` on `ds`.
pub fn mean_loss(ds: &Dataset, theta: &[f64]) -> f64 {
    let v = Loss { ds }.value(theta).unwrap_or(f64::INFINITY);
    match ds.task() {
        Task::Regression => v / ds.n() as f64,
        Task::Classification => v,
    }
}

/// Least squares or logistic regression without any constraint.
pub fn solve_unconstrained(dataset: &Dataset, config: &SolverConfig) -> Result<LinearModel> {
    let k = dataset.k();
    let opts = InnerOptions {
        tol_g: config.tol_g * gradient_scale(dataset),
        max_iter: config.max_inner,
    };
    let m = optim::newton(&Loss { ds: dataset }, &vec![0.0; k], opts)?;
    if !m.converged {
        return Err(Error::NonConvergence {
            iterations: m.iterations,
            residual: m.grad_norm,
        });
    }
    LinearModel::new(m.x)
}

/// Shift of the intercept and multiplier of the realizable-data optimum:
/// `theta' = theta* + (tau^(1/alpha) - 1) e_k` and
/// `lambda' = 2 / (alpha tau) * tau^(1/alpha) * (tau^(1/alpha) - 1)`.
pub fn closed_form_realizable(
    theta_star: &LinearModel,
    alpha: f64,
    tau: f64,
) -> Result<(LinearModel, f64)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::UnsupportedAlpha(alpha));
    }
    if !(tau >= 1.0 && tau.is_finite()) {
        return Err(Error::param(format!("closed form needs tau >= 1, got {tau}")));
    }
    let root = math::pow(tau, 1.0 / alpha);
    let shift = root - 1.0;
    let mut w = theta_star.weights().to_vec();
    let last = w.len() - 1;
    w[last] += shift;
    Ok((LinearModel::new(w)?, 2.0 / (alpha * tau) * root * shift))
}

/// Regression benefits `theta . x_i - y_i + 1`.
fn regression_benefits(ds: &Dataset, theta: &[f64]) -> Vec<f64> {
    ds.rows().zip(ds.labels()).map(|(x, y)| math::dot(theta, x) - y + 1.0).collect()
}

/// `sum (theta x - y)^2 - lambda * sum (theta x - y + 1)^alpha`.
struct RegressionPenalty<'a> {
    ds: &'a Dataset,
    alpha: f64,
    lambda: f64,
    floor: f64,
}

impl Objective for RegressionPenalty<'_> {
    fn dim(&self) -> usize {
        self.ds.k()
    }

    fn value(&self, theta: &[f64]) -> Option<f64> {
        let mut loss = 0.0;
        let mut welfare = 0.0;
        for (x, y) in self.ds.rows().zip(self.ds.labels()) {
            let r = math::dot(theta, x) - y;
            loss += r * r;
            if self.lambda > 0.0 {
                let b = r + 1.0;
                if !(b >= self.floor) {
                    return None;
                }
                welfare += math::pow(b, self.alpha);
            }
        }
        Some(loss - self.lambda * welfare)
    }

    fn gradient(&self, theta: &[f64], g: &mut [f64]) {
        g.iter_mut().for_each(|v| *v = 0.0);
        let la = self.lambda * self.alpha;
        for (x, y) in self.ds.rows().zip(self.ds.labels()) {
            let r = math::dot(theta, x) - y;
            let mut c = 2.0 * r;
            if self.lambda > 0.0 {
                c -= la * math::pow(r + 1.0, self.alpha - 1.0);
            }
            axpy(g, c, x);
        }
    }

    fn hessian(&self, theta: &[f64], h: &mut [f64]) -> bool {
        h.iter_mut().for_each(|v| *v = 0.0);
        let curv = self.lambda * self.alpha * (1.0 - self.alpha);
        for (x, y) in self.ds.rows().zip(self.ds.labels()) {
            let mut c = 2.0;
            if self.lambda > 0.0 {
                c += curv * math::pow(math::dot(theta, x) - y + 1.0, self.alpha - 2.0);
            }
            outer_add(h, c, x);
        }
        true
    }
}

struct RegressionFamily<'a> {
    ds: &'a Dataset,
    spec: ConstraintSpec,
    floor: f64,
    opts: InnerOptions,
    unconstrained: Vec<f64>,
    unconverged: bool,
    last_grad: f64,
}

impl PenalizedFamily for RegressionFamily<'_> {
    fn minimize(&mut self, lambda: f64, warm: &[f64]) -> Result<Vec<f64>> {
        if lambda == 0.0 {
            self.last_grad = 0.0;
            return Ok(self.unconstrained.clone());
        }
        let mut start = warm.to_vec();
        let min_b = regression_benefits(self.ds, &start).into_iter().fold(f64::INFINITY, f64::min);
        if !(min_b >= 10.0 * self.floor) {
            // raising the intercept raises every benefit equally
            let last = start.len() - 1;
            start[last] += 1.0 - min_b;
        }
        let f = RegressionPenalty {
            ds: self.ds,
            alpha: self.spec.alpha,
            lambda,
            floor: self.floor,
        };
        let m = optim::newton(&f, &start, self.opts)
            .map_err(|_| Error::DomainCollapse { floor: self.floor })?;
        self.unconverged |= !m.converged;
        self.last_grad = m.grad_norm;
        Ok(m.x)
    }

    fn slack(&self, theta: &[f64]) -> f64 {
        let mut total = 0.0;
        for b in regression_benefits(self.ds, theta) {
            if !(b >= self.floor) {
                return f64::NEG_INFINITY;
            }
            total += math::pow(b, self.spec.alpha);
        }
        total / self.ds.n() as f64 - self.spec.tau
    }
}

/// Joint Newton on the KKT system in `(theta, lambda)` for an active
/// constraint. Returns the improved pair, or `None` if no progress was made.
fn polish_regression(
    ds: &Dataset,
    alpha: f64,
    tau: f64,
    floor: f64,
    theta: &[f64],
    lambda: f64,
) -> Option<(Vec<f64>, f64)> {
    let k = ds.k();
    let n = ds.n() as f64;
    let residual = |theta: &[f64], lambda: f64| -> Option<Vec<f64>> {
        let mut f = vec![0.0; k + 1];
        let mut welfare = 0.0;
        for (x, y) in ds.rows().zip(ds.labels()) {
            let r = math::dot(theta, x) - y;
            let b = r + 1.0;
            if !(b >= floor) {
                return None;
            }
            axpy(&mut f[..k], 2.0 * r - lambda * alpha * math::pow(b, alpha - 1.0), x);
            welfare += math::pow(b, alpha);
        }
        f[k] = welfare - tau * n;
        Some(f)
    };
    let merit = |f: &[f64]| f.iter().map(|v| v * v).sum::<f64>();
    let (mut th, mut la) = (theta.to_vec(), lambda);
    let mut f = residual(&th, la)?;
    let mut m = merit(&f);
    let start = m;
    for _ in 0..50 {
        if m == 0.0 {
            break;
        }
        let dim = k + 1;
        let mut jac = vec![0.0; dim * dim];
        for (x, y) in ds.rows().zip(ds.labels()) {
            let b = math::dot(&th, x) - y + 1.0;
            let c = 2.0 + la * alpha * (1.0 - alpha) * math::pow(b, alpha - 2.0);
            let gcoef = alpha * math::pow(b, alpha - 1.0);
            for i in 0..k {
                for j in 0..k {
                    jac[i * dim + j] += c * x[i] * x[j];
                }
                jac[i * dim + k] -= gcoef * x[i];
                jac[k * dim + i] += gcoef * x[i];
            }
        }
        let rhs: Vec<f64> = f.iter().map(|v| -v).collect();
        let d = math::solve_general(&jac, dim, &rhs)?;
        let mut t = 1.0;
        let mut improved = false;
        while t > 1e-6 {
            let cand: Vec<f64> = th.iter().zip(&d).map(|(a, b)| a + t * b).collect();
            let cl = la + t * d[k];
            if cl > 0.0 {
                if let Some(fc) = residual(&cand, cl) {
                    let mc = merit(&fc);
                    if mc < m {
                        th = cand;
                        la = cl;
                        f = fc;
                        m = mc;
                        improved = true;
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (m < start).then_some((th, la))
}

fn regression_welfare(ds: &Dataset, theta: &[f64], alpha: f64, floor: f64) -> f64 {
    let b = regression_benefits(ds, theta);
    b.iter().map(|&v| math::pow(v.max(floor), alpha)).sum::<f64>() / b.len() as f64
}

/// Welfare-constrained least squares.
pub fn solve_constrained_regression(
    dataset: &Dataset,
    spec: &ConstraintSpec,
    config: &SolverConfig,
) -> Result<SolveResult> {
    spec.validate()?;
    config.validate()?;
    if dataset.task() != Task::Regression {
        return Err(Error::param("constrained regression needs a regression dataset"));
    }
    if spec.benefit != BenefitSpec::Regression {
        return Err(Error::param("constrained regression uses the benefit y_hat - y + 1"));
    }
    let gscale = gradient_scale(dataset);
    let unconstrained = solve_unconstrained(dataset, config)?.into_weights();
    let mut family = RegressionFamily {
        ds: dataset,
        spec: *spec,
        floor: config.benefit_floor,
        opts: InnerOptions {
            tol_g: config.tol_g * gscale,
            max_iter: config.max_inner,
        },
        unconstrained: unconstrained.clone(),
        unconverged: false,
        last_grad: 0.0,
    };
    let sol = match optim::dual_bisection(&mut family, &unconstrained, config.bisection()) {
        Ok(s) => s,
        Err(Error::LambdaOverflow { lambda_max }) => {
            return Err(Error::Infeasible(format!(
                "mean welfare {} not reached with lambda up to {lambda_max:e}",
                spec.tau
            )))
        }
        Err(e) => return Err(e),
    };
    let (mut theta, mut lambda) = (sol.x, sol.lambda);
    if lambda > 0.0 {
        if let Some((t, l)) =
            polish_regression(dataset, spec.alpha, spec.tau, config.benefit_floor, &theta, lambda)
        {
            theta = t;
            lambda = l;
        }
    }
    let model = LinearModel::new(theta)?;
    let kkt = kkt_residuals(dataset, spec, &model, lambda)?;
    let status = if sol.exhausted || family.unconverged {
        SolveStatus::MaxIter
    } else {
        SolveStatus::Optimal
    };
    let constraint_value = regression_welfare(dataset, model.weights(), spec.alpha, config.benefit_floor);
    let certified = status == SolveStatus::Optimal
        && kkt.stationarity_norm <= 1e-6 * gscale
        && kkt.primal_violation <= config.tol_c;
    Ok(SolveResult {
        loss: mean_loss(dataset, model.weights()),
        model,
        lambda,
        constraint_value,
        active: lambda > 0.0,
        status,
        certified,
        iterations: sol.outer_iterations,
        inner_gradient_norm: kkt.stationarity_norm,
    })
}

/// `u(b)` with a linear extension below the floor, so penalised objectives
/// stay finite and push benefits back into the domain.
#[inline]
fn extended_utility(b: f64, alpha: f64, floor: f64) -> (f64, f64) {
    if b >= floor {
        (math::pow(b, alpha), alpha * math::pow(b, alpha - 1.0))
    } else {
        let slope = alpha * math::pow(floor, alpha - 1.0);
        (math::pow(floor, alpha) + slope * (b - floor), slope)
    }
}

/// Mean logistic loss minus `lambda` times mean welfare of the scaled scores.
struct ClassificationPenalty<'a> {
    ds: &'a Dataset,
    affine: &'a [Affine],
    scale_c: f64,
    alpha: f64,
    lambda: f64,
    floor: f64,
}

impl Objective for ClassificationPenalty<'_> {
    fn dim(&self) -> usize {
        self.ds.k()
    }

    fn value(&self, theta: &[f64]) -> Option<f64> {
        let mut total = 0.0;
        for ((x, y), a) in self.ds.rows().zip(self.ds.labels()).zip(self.affine) {
            let s = math::dot(theta, x);
            total += math::softplus(-y * s);
            if self.lambda > 0.0 {
                total -= self.lambda * extended_utility(a.eval(s / self.scale_c), self.alpha, self.floor).0;
            }
        }
        Some(total / self.ds.n() as f64)
    }

    fn gradient(&self, theta: &[f64], g: &mut [f64]) {
        g.iter_mut().for_each(|v| *v = 0.0);
        let inv = 1.0 / self.ds.n() as f64;
        for ((x, y), a) in self.ds.rows().zip(self.ds.labels()).zip(self.affine) {
            let s = math::dot(theta, x);
            let mut c = -y * math::sigmoid(-y * s);
            if self.lambda > 0.0 {
                let du = extended_utility(a.eval(s / self.scale_c), self.alpha, self.floor).1;
                c -= self.lambda * du * a.slope / self.scale_c;
            }
            axpy(g, c * inv, x);
        }
    }
}

fn classification_affines(ds: &Dataset, spec: &ConstraintSpec) -> Result<Vec<Affine>> {
    ds.labels().iter().map(|&y| spec.benefit.affine_for(y)).collect()
}

fn classification_benefits(ds: &Dataset, affine: &[Affine], scale_c: f64, theta: &[f64]) -> Vec<f64> {
    ds.rows().zip(affine).map(|(x, a)| a.eval(math::dot(theta, x) / scale_c)).collect()
}

fn floored_mean_welfare(benefits: &[f64], alpha: f64, floor: f64) -> f64 {
    benefits.iter().map(|&b| math::pow(b.max(floor), alpha)).sum::<f64>() / benefits.len() as f64
}

struct ClassificationFamily<'a> {
    ds: &'a Dataset,
    affine: &'a [Affine],
    spec: ConstraintSpec,
    floor: f64,
    opts: InnerOptions,
    unconverged: bool,
    last_grad: f64,
}

impl ClassificationFamily<'_> {
    fn penalty(&self, lambda: f64) -> ClassificationPenalty<'_> {
        ClassificationPenalty {
            ds: self.ds,
            affine: self.affine,
            scale_c: self.spec.scale_c,
            alpha: self.spec.alpha,
            lambda,
            floor: self.floor,
        }
    }
}

impl PenalizedFamily for ClassificationFamily<'_> {
    fn minimize(&mut self, lambda: f64, warm: &[f64]) -> Result<Vec<f64>> {
        // the penalty term's gradient grows with lambda
        let opts = InnerOptions {
            tol_g: self.opts.tol_g * (1.0 + lambda),
            ..self.opts
        };
        let m = optim::sphere_descent(&self.penalty(lambda), warm, opts)?;
        self.unconverged |= !m.converged;
        self.last_grad = m.grad_norm;
        Ok(m.x)
    }

    fn slack(&self, theta: &[f64]) -> f64 {
        let b = classification_benefits(self.ds, self.affine, self.spec.scale_c, theta);
        floored_mean_welfare(&b, self.spec.alpha, self.floor) - self.spec.tau
    }
}

/// Upper bound on attainable mean welfare over the unit sphere:
/// `|theta . x_i| <= |x_i|` bounds every benefit separately.
fn classification_welfare_bound(ds: &Dataset, affine: &[Affine], spec: &ConstraintSpec) -> f64 {
    let total: f64 = ds
        .rows()
        .zip(affine)
        .map(|(x, a)| {
            let reach = math::norm(x) / spec.scale_c;
            let best = a.eval(reach).max(a.eval(-reach));
            if best > 0.0 {
                math::pow(best, spec.alpha)
            } else {
                0.0
            }
        })
        .sum();
    total / ds.n() as f64
}

fn restart_points(ds: &Dataset, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let k = ds.k();
    let mut xtx = vec![0.0; k * k];
    let mut xty = vec![0.0; k];
    for (x, y) in ds.rows().zip(ds.labels()) {
        outer_add(&mut xtx, 1.0, x);
        axpy(&mut xty, *y, x);
    }
    let mut starts = Vec::with_capacity(count);
    match math::solve_spd(&xtx, k, &xty) {
        Some(d) if math::norm(&d) > 0.0 => starts.push(d),
        _ => {
            let mut e = vec![0.0; k];
            e[0] = 1.0;
            starts.push(e);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while starts.len() < count {
        let v: Vec<f64> = (0..k).map(|_| StandardNormal.sample(&mut rng)).collect();
        if math::norm(&v) > 0.0 {
            starts.push(v);
        }
    }
    for s in &mut starts {
        let r = math::norm(s);
        s.iter_mut().for_each(|v| *v /= r);
    }
    starts
}

/// Welfare-constrained logistic regression on the unit sphere.
pub fn solve_constrained_classification(
    dataset: &Dataset,
    spec: &ConstraintSpec,
    config: &SolverConfig,
) -> Result<SolveResult> {
    spec.validate()?;
    config.validate()?;
    if dataset.task() != Task::Classification {
        return Err(Error::param("constrained classification needs a classification dataset"));
    }
    let affine = classification_affines(dataset, spec)?;
    let bound = classification_welfare_bound(dataset, &affine, spec);
    if spec.tau > bound {
        return Err(Error::Infeasible(format!(
            "tau {} exceeds the attainable mean welfare bound {bound}",
            spec.tau
        )));
    }
    let opts = BisectionOptions {
        stop_slack: Some(config.tol_c),
        ..config.bisection()
    };
    let mut best: Option<(f64, SolveResult)> = None;
    let mut collapsed = 0;
    for start in restart_points(dataset, config.restarts, config.seed) {
        let mut family = ClassificationFamily {
            ds: dataset,
            affine: &affine,
            spec: *spec,
            floor: config.benefit_floor,
            opts: InnerOptions {
                tol_g: config.tol_g * gradient_scale(dataset),
                max_iter: config.max_inner,
            },
            unconverged: false,
            last_grad: 0.0,
        };
        let sol = match optim::dual_bisection(&mut family, &start, opts) {
            Ok(s) => s,
            Err(Error::LambdaOverflow { .. }) => continue,
            Err(e) => return Err(e),
        };
        let b = classification_benefits(dataset, &affine, spec.scale_c, &sol.x);
        if sol.lambda > 0.0 && b.iter().any(|&v| v < config.benefit_floor) {
            collapsed += 1;
            continue;
        }
        let loss = mean_loss(dataset, &sol.x);
        if best.as_ref().is_some_and(|(l, _)| *l <= loss) {
            continue;
        }
        let status = if sol.exhausted || family.unconverged {
            SolveStatus::MaxIter
        } else {
            SolveStatus::Optimal
        };
        best = Some((
            loss,
            SolveResult {
                constraint_value: floored_mean_welfare(&b, spec.alpha, config.benefit_floor),
                model: LinearModel::new(sol.x)?,
                lambda: sol.lambda,
                loss,
                active: sol.lambda > 0.0,
                status,
                certified: false,
                iterations: sol.outer_iterations,
                inner_gradient_norm: family.last_grad,
            },
        ));
    }
    match best {
        Some((_, r)) => Ok(r),
        None if collapsed > 0 => Err(Error::DomainCollapse { floor: config.benefit_floor }),
        None => Err(Error::Infeasible(format!(
            "no restart reached mean welfare {}",
            spec.tau
        ))),
    }
}

/// Dispatches on the dataset's task.
pub fn solve_constrained(
    dataset: &Dataset,
    spec: &ConstraintSpec,
    config: &SolverConfig,
) -> Result<SolveResult> {
    match dataset.task() {
        Task::Regression => solve_constrained_regression(dataset, spec, config),
        Task::Classification => solve_constrained_classification(dataset, spec, config),
    }
}

/// Mean welfare of a model under the constraint's benefit.
pub fn constraint_value(
    dataset: &Dataset,
    spec: &ConstraintSpec,
    model: &LinearModel,
    floor: f64,
) -> Result<f64> {
    let scores = model.predict(dataset)?;
    let scale = match dataset.task() {
        Task::Regression => 1.0,
        Task::Classification => spec.scale_c,
    };
    let b = scores
        .iter()
        .zip(dataset.labels())
        .map(|(s, &y)| spec.benefit.raw(y, s / scale))
        .collect::<Result<Vec<_>>>()?;
    Ok(floored_mean_welfare(&b, spec.alpha, floor))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktResiduals {
    /// Norm of the Lagrangian gradient (tangential on the sphere for
    /// classification).
    pub stationarity_norm: f64,
    /// `max(0, tau - mean welfare)`.
    pub primal_violation: f64,
    /// `max(0, -lambda)`.
    pub dual_feasibility: f64,
    /// `|lambda * (constraint - target)|` in the multiplier's units.
    pub complementary_slackness: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.stationarity_norm
            .max(self.primal_violation)
            .max(self.dual_feasibility)
            .max(self.complementary_slackness)
    }
}

/// KKT residuals of `(model, lambda)` from the explicit gradient formulas.
/// Benefits are clamped to the default floor where they are not positive.
pub fn kkt_residuals(
    dataset: &Dataset,
    spec: &ConstraintSpec,
    model: &LinearModel,
    lambda: f64,
) -> Result<KktResiduals> {
    spec.validate()?;
    Error::check_len(dataset.k(), model.k())?;
    let floor = crate::DEFAULT_BENEFIT_FLOOR;
    let theta = model.weights();
    let n = dataset.n() as f64;
    let mut g = vec![0.0; dataset.k()];
    let (welfare_mean, scale) = match dataset.task() {
        Task::Regression => {
            let pen = RegressionPenalty { ds: dataset, alpha: spec.alpha, lambda: 0.0, floor };
            pen.gradient(theta, &mut g);
            for (x, y) in dataset.rows().zip(dataset.labels()) {
                let b = (math::dot(theta, x) - y + 1.0).max(floor);
                axpy(&mut g, -lambda * spec.alpha * math::pow(b, spec.alpha - 1.0), x);
            }
            (regression_welfare(dataset, theta, spec.alpha, floor), n)
        }
        Task::Classification => {
            let affine = classification_affines(dataset, spec)?;
            let pen = ClassificationPenalty {
                ds: dataset,
                affine: &affine,
                scale_c: spec.scale_c,
                alpha: spec.alpha,
                lambda,
                floor,
            };
            pen.gradient(theta, &mut g);
            let r = math::dot(&g, theta) / math::dot(theta, theta);
            for (gi, t) in g.iter_mut().zip(theta) {
                *gi -= r * t;
            }
            let b = classification_benefits(dataset, &affine, spec.scale_c, theta);
            (floored_mean_welfare(&b, spec.alpha, floor), 1.0)
        }
    };
    Ok(KktResiduals {
        stationarity_norm: math::norm(&g),
        primal_violation: (spec.tau - welfare_mean).max(0.0),
        dual_feasibility: (-lambda).max(0.0),
        complementary_slackness: math::abs(lambda * (welfare_mean - spec.tau) * scale),
    })
}
