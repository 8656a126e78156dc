//! Smooth minimisers and the single-multiplier dual search built on them.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// A smooth objective on an open domain.
pub trait Objective {
    fn dim(&self) -> usize;
    /// `None` outside the domain.
    fn value(&self, x: &[f64]) -> Option<f64>;
    fn gradient(&self, x: &[f64], g: &mut [f64]);
    /// Row-major Hessian into `h`; returns `false` when not available.
    fn hessian(&self, _x: &[f64], _h: &mut [f64]) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerOptions {
    /// Stop once the (projected) gradient norm is at most this.
    pub tol_g: f64,
    pub max_iter: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    /// `false` when the iteration budget ran out or the line search stalled
    /// before the gradient tolerance was met.
    pub converged: bool,
}

const ARMIJO: f64 = 1e-4;
const MIN_STEP: f64 = 1e-20;

/// Newton direction from a Cholesky solve, with a growing diagonal shift
/// when the Hessian is not positive definite. Falls back to `-g`.
fn newton_direction(h: &mut [f64], g: &[f64], n: usize) -> Vec<f64> {
    let scale = (0..n).map(|i| math::abs(h[i * n + i])).fold(0.0, f64::max).max(1e-300);
    let base = h.to_vec();
    let mut shift = 0.0;
    for _ in 0..8 {
        h.copy_from_slice(&base);
        for i in 0..n {
            h[i * n + i] += shift;
        }
        if math::cholesky(h, n) {
            let rhs: Vec<f64> = g.iter().map(|v| -v).collect();
            let d = math::cholesky_solve(h, n, &rhs);
            if d.iter().all(|v| v.is_finite()) {
                return d;
            }
        }
        shift = if shift == 0.0 { 1e-10 * scale } else { shift * 100.0 };
    }
    g.iter().map(|v| -v).collect()
}

/// Damped Newton with Armijo backtracking. Points where the objective is
/// undefined are rejected by the line search. When roundoff makes the
/// sufficient-decrease test meaningless, a step that reduces the gradient
/// norm is accepted instead.
pub fn newton<F: Objective + ?Sized>(f: &F, x0: &[f64], opts: InnerOptions) -> Result<Minimum> {
    let n = f.dim();
    Error::check_len(n, x0.len())?;
    let mut x = x0.to_vec();
    let mut fx = f
        .value(&x)
        .ok_or_else(|| Error::param("starting point is outside the objective's domain"))?;
    let mut g = vec![0.0; n];
    let mut h = vec![0.0; n * n];
    let mut gn = vec![0.0; n];
    let mut iterations = 0;
    loop {
        f.gradient(&x, &mut g);
        let gnorm = math::norm(&g);
        if gnorm <= opts.tol_g {
            return Ok(Minimum { x, value: fx, grad_norm: gnorm, iterations, converged: true });
        }
        if iterations >= opts.max_iter {
            return Ok(Minimum { x, value: fx, grad_norm: gnorm, iterations, converged: false });
        }
        iterations += 1;
        let mut d = if f.hessian(&x, &mut h) {
            newton_direction(&mut h, &g, n)
        } else {
            g.iter().map(|v| -v).collect()
        };
        let mut slope = math::dot(&g, &d);
        if !(slope < 0.0) {
            d = g.iter().map(|v| -v).collect();
            slope = -gnorm * gnorm;
        }
        let mut t = 1.0;
        let mut accepted = false;
        let mut trial = vec![0.0; n];
        while t >= MIN_STEP {
            for i in 0..n {
                trial[i] = x[i] + t * d[i];
            }
            if let Some(ft) = f.value(&trial) {
                if ft <= fx + ARMIJO * t * slope {
                    x.copy_from_slice(&trial);
                    fx = ft;
                    accepted = true;
                    break;
                }
                // at roundoff level compare gradients instead of values
                if math::abs(ft - fx) <= 1e-12 * (1.0 + math::abs(fx)) {
                    f.gradient(&trial, &mut gn);
                    if math::norm(&gn) < gnorm {
                        x.copy_from_slice(&trial);
                        fx = ft;
                        accepted = true;
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        if !accepted {
            return Ok(Minimum { x, value: fx, grad_norm: gnorm, iterations, converged: false });
        }
    }
}

fn normalize(x: &mut [f64]) {
    let r = math::norm(x);
    for v in x.iter_mut() {
        *v /= r;
    }
}

fn tangent_norm<F: Objective + ?Sized>(f: &F, x: &[f64], g: &mut [f64]) -> f64 {
    f.gradient(x, g);
    let radial = math::dot(g, x);
    for (gi, xi) in g.iter_mut().zip(x) {
        *gi -= radial * xi;
    }
    math::norm(g)
}

/// Projected gradient descent on the unit sphere: each step moves along the
/// tangential gradient and renormalises. Step sizes grow after successes
/// and halve on Armijo failures.
pub fn sphere_descent<F: Objective + ?Sized>(
    f: &F,
    x0: &[f64],
    opts: InnerOptions,
) -> Result<Minimum> {
    let n = f.dim();
    Error::check_len(n, x0.len())?;
    let mut x = x0.to_vec();
    if !(math::norm(&x) > 0.0) {
        return Err(Error::param("sphere descent needs a non-zero start"));
    }
    normalize(&mut x);
    let mut fx = f
        .value(&x)
        .ok_or_else(|| Error::param("starting point is outside the objective's domain"))?;
    let mut g = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut gt = vec![0.0; n];
    let mut eta = 1.0;
    let mut iterations = 0;
    loop {
        let gnorm = tangent_norm(f, &x, &mut g);
        if gnorm <= opts.tol_g {
            return Ok(Minimum { x, value: fx, grad_norm: gnorm, iterations, converged: true });
        }
        if iterations >= opts.max_iter {
            return Ok(Minimum { x, value: fx, grad_norm: gnorm, iterations, converged: false });
        }
        iterations += 1;
        eta *= 2.0;
        let mut accepted = false;
        while eta >= MIN_STEP {
            for i in 0..n {
                trial[i] = x[i] - eta * g[i];
            }
            normalize(&mut trial);
            if let Some(ft) = f.value(&trial) {
                let accept = ft <= fx - ARMIJO * eta * gnorm * gnorm
                    || (math::abs(ft - fx) <= 1e-12 * (1.0 + math::abs(fx))
                        && tangent_norm(f, &trial, &mut gt) < gnorm);
                if accept {
                    x.copy_from_slice(&trial);
                    fx = ft;
                    accepted = true;
                    break;
                }
            }
            eta *= 0.5;
        }
        if !accepted {
            return Ok(Minimum { x, value: fx, grad_norm: gnorm, iterations, converged: false });
        }
    }
}

/// `min L(x) - lambda * g(x)` for every `lambda >= 0`, with the constraint
/// `g(x) >= target` measured by `slack`.
pub trait PenalizedFamily {
    fn minimize(&mut self, lambda: f64, warm: &[f64]) -> Result<Vec<f64>>;
    /// `g(x) - target`; non-negative means feasible.
    fn slack(&self, x: &[f64]) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BisectionOptions {
    pub lambda_max: f64,
    pub max_outer: usize,
    /// Bisection stops once `hi - lo <= rel_width * hi`.
    pub rel_width: f64,
    /// Optional early stop once the feasible end has slack at most this.
    pub stop_slack: Option<f64>,
}

impl Default for BisectionOptions {
    fn default() -> Self {
        BisectionOptions {
            lambda_max: 1e12,
            max_outer: 200,
            rel_width: 1e-10,
            stop_slack: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub x: Vec<f64>,
    pub lambda: f64,
    pub slack: f64,
    pub outer_iterations: usize,
    /// Final `[lo, hi]`; `lo` infeasible (or 0), `hi` feasible.
    pub bracket: (f64, f64),
    /// `max_outer` ran out before the bracket reached the target width.
    pub exhausted: bool,
}

/// Search for the smallest multiplier whose penalised minimiser is
/// feasible. The unconstrained minimiser is tried first; otherwise the
/// bracket starts at `[0, 1]` and doubles its upper end until feasible, then
/// bisects. Returns the feasible end of the final bracket.
pub fn dual_bisection<P: PenalizedFamily + ?Sized>(
    family: &mut P,
    x0: &[f64],
    opts: BisectionOptions,
) -> Result<DualSolution> {
    let x = family.minimize(0.0, x0)?;
    let s = family.slack(&x);
    if s >= 0.0 {
        return Ok(DualSolution {
            x,
            lambda: 0.0,
            slack: s,
            outer_iterations: 0,
            bracket: (0.0, 0.0),
            exhausted: false,
        });
    }
    let mut outer = 0;
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut warm = x;
    let (mut x_hi, mut s_hi) = loop {
        outer += 1;
        let xh = family.minimize(hi, &warm)?;
        let sh = family.slack(&xh);
        if sh >= 0.0 {
            break (xh, sh);
        }
        lo = hi;
        hi *= 2.0;
        warm = xh;
        if hi > opts.lambda_max {
            return Err(Error::LambdaOverflow { lambda_max: opts.lambda_max });
        }
    };
    let mut exhausted = false;
    while hi - lo > opts.rel_width * hi {
        if opts.stop_slack.is_some_and(|t| s_hi <= t) {
            break;
        }
        if outer >= opts.max_outer {
            exhausted = true;
            break;
        }
        outer += 1;
        let mid = 0.5 * (lo + hi);
        let xm = family.minimize(mid, &x_hi)?;
        let sm = family.slack(&xm);
        if sm >= 0.0 {
            hi = mid;
            x_hi = xm;
            s_hi = sm;
        } else {
            lo = mid;
        }
    }
    Ok(DualSolution {
        x: x_hi,
        lambda: hi,
        slack: s_hi,
        outer_iterations: outer,
        bracket: (lo, hi),
        exhausted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `sum (x_i - c_i)^2 / 2` restricted to `x_0 > 0`.
    struct Bowl {
        c: Vec<f64>,
        hess: bool,
    }

    impl Objective for Bowl {
        fn dim(&self) -> usize {
            self.c.len()
        }
        fn value(&self, x: &[f64]) -> Option<f64> {
            (x[0] > 0.0).then(|| x.iter().zip(&self.c).map(|(a, b)| 0.5 * (a - b) * (a - b)).sum())
        }
        fn gradient(&self, x: &[f64], g: &mut [f64]) {
            for i in 0..x.len() {
                g[i] = x[i] - self.c[i];
            }
        }
        fn hessian(&self, _x: &[f64], h: &mut [f64]) -> bool {
            let n = self.c.len();
            h.iter_mut().for_each(|v| *v = 0.0);
            for i in 0..n {
                h[i * n + i] = 1.0;
            }
            self.hess
        }
    }

    const OPTS: InnerOptions = InnerOptions { tol_g: 1e-10, max_iter: 1000 };

    #[test]
    fn newton_solves_quadratic_in_one_step() {
        let f = Bowl { c: vec![2.0, -1.0], hess: true };
        let m = newton(&f, &[1.0, 1.0], OPTS).unwrap();
        assert!(m.converged);
        assert_eq!(m.iterations, 1);
        assert!((m.x[0] - 2.0).abs() < 1e-12 && (m.x[1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn gradient_fallback_and_domain_guard() {
        let f = Bowl { c: vec![-3.0, 0.5], hess: false };
        let m = newton(&f, &[1.0, 0.0], OPTS).unwrap();
        // the minimiser lies outside the domain; iterates never leave it
        assert!(m.x[0] > 0.0);
        assert!(m.value < f.value(&[1.0, 0.0]).unwrap());
        assert!(!m.converged);
        assert!(newton(&f, &[-1.0, 0.0], OPTS).is_err());
    }

    #[test]
    fn sphere_descent_finds_closest_direction() {
        // minimising |x - c|^2 on the sphere gives c / |c|
        let f = Bowl { c: vec![3.0, 4.0], hess: false };
        let m = sphere_descent(&f, &[1.0, 0.0], OPTS).unwrap();
        assert!(m.converged);
        assert!((m.x[0] - 0.6).abs() < 1e-8 && (m.x[1] - 0.8).abs() < 1e-8);
        assert!((math::norm(&m.x) - 1.0).abs() < 1e-12);
    }

    /// `min (x - a)^2 - lambda * x` so `x(lambda) = a + lambda / 2`;
    /// constraint `x >= t` gives `lambda* = 2 (t - a)`.
    struct Shift {
        a: f64,
        t: f64,
        calls: usize,
    }

    impl PenalizedFamily for Shift {
        fn minimize(&mut self, lambda: f64, _warm: &[f64]) -> Result<Vec<f64>> {
            self.calls += 1;
            Ok(vec![self.a + 0.5 * lambda])
        }
        fn slack(&self, x: &[f64]) -> f64 {
            x[0] - self.t
        }
    }

    #[test]
    fn bisection_returns_zero_when_unconstrained_is_feasible() {
        let mut fam = Shift { a: 3.0, t: 1.0, calls: 0 };
        let s = dual_bisection(&mut fam, &[0.0], BisectionOptions::default()).unwrap();
        assert_eq!((s.lambda, s.outer_iterations, fam.calls), (0.0, 0, 1));
    }

    #[test]
    fn bisection_brackets_the_multiplier() {
        let mut fam = Shift { a: 0.0, t: 5.0, calls: 0 };
        let s = dual_bisection(&mut fam, &[0.0], BisectionOptions::default()).unwrap();
        assert!((s.lambda - 10.0).abs() <= 1e-9 * 10.0);
        assert!(s.slack >= 0.0);
        assert!(s.bracket.1 - s.bracket.0 <= 1e-10 * s.bracket.1);
        assert!(!s.exhausted);
    }

    #[test]
    fn bisection_overflow() {
        let mut fam = Shift { a: 0.0, t: 1e9, calls: 0 };
        let opts = BisectionOptions { lambda_max: 1e6, ..Default::default() };
        assert_eq!(
            dual_bisection(&mut fam, &[0.0], opts),
            Err(Error::LambdaOverflow { lambda_max: 1e6 })
        );
    }
}
