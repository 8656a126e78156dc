//! Benefit functions that are affine in the predicted label, and the benefit
//! profiles they induce over a dataset.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Encoding of ground-truth labels a [`BenefitSpec`] accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LabelDomain {
    /// Labels in `{0, 1}`.
    Binary01,
    /// Labels in `{-1, +1}`.
    BinaryPm1,
    /// Real-valued labels (regression).
    Continuous,
}

/// `b = slope * y_hat + offset` for one ground-truth label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine {
    pub slope: f64,
    pub offset: f64,
}

impl Affine {
    pub const fn new(slope: f64, offset: f64) -> Self {
        Affine { slope, offset }
    }

    #[inline]
    pub fn eval(&self, y_hat: f64) -> f64 {
        self.slope * y_hat + self.offset
    }
}

/// Benefit function `b(y, y_hat)`, affine in `y_hat` for every `y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BenefitSpec {
    /// Two labels, one affine map each. `negative` applies to label 0
    /// (or -1), `positive` to label 1.
    Binary {
        domain: LabelDomain,
        negative: Affine,
        positive: Affine,
    },
    /// `b(y, y_hat) = y_hat - y + 1`, i.e. slope 1 and offset `1 - y`.
    Regression,
}

impl BenefitSpec {
    pub const fn regression() -> Self {
        BenefitSpec::Regression
    }

    pub fn binary(domain: LabelDomain, negative: Affine, positive: Affine) -> Result<Self> {
        if domain == LabelDomain::Continuous {
            return Err(Error::param("binary benefit needs a binary label domain"));
        }
        Ok(BenefitSpec::Binary {
            domain,
            negative,
            positive,
        })
    }

    /// The `{-1, +1}` classification benefit giving 0 to false negatives,
    /// 1 to true positives and true negatives and 1.5 to false positives.
    pub const fn classification_default() -> Self {
        BenefitSpec::Binary {
            domain: LabelDomain::BinaryPm1,
            negative: Affine::new(0.25, 1.25),
            positive: Affine::new(0.5, 0.5),
        }
    }

    pub fn domain(&self) -> LabelDomain {
        match self {
            BenefitSpec::Binary { domain, .. } => *domain,
            BenefitSpec::Regression => LabelDomain::Continuous,
        }
    }

    /// The affine map `y_hat -> b(y, y_hat)` for ground truth `y`.
    pub fn affine_for(&self, y: f64) -> Result<Affine> {
        match *self {
            BenefitSpec::Regression => {
                if y.is_finite() {
                    Ok(Affine::new(1.0, 1.0 - y))
                } else {
                    Err(Error::UnknownLabel(y))
                }
            }
            BenefitSpec::Binary {
                domain,
                negative,
                positive,
            } => {
                let neg_label = if domain == LabelDomain::Binary01 { 0.0 } else { -1.0 };
                if y == 1.0 {
                    Ok(positive)
                } else if y == neg_label {
                    Ok(negative)
                } else {
                    Err(Error::UnknownLabel(y))
                }
            }
        }
    }

    /// Raw `c_y * y_hat + d_y`, without any positivity handling.
    pub fn raw(&self, y: f64, y_hat: f64) -> Result<f64> {
        Ok(self.affine_for(y)?.eval(y_hat))
    }
}

/// How benefits that are not strictly positive are treated.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Positivity {
    /// Reject any benefit `<= 0`.
    #[default]
    Strict,
    /// Clamp benefits below the floor up to the floor.
    Floor(f64),
}

impl Positivity {
    pub const fn floor() -> Self {
        Positivity::Floor(crate::DEFAULT_BENEFIT_FLOOR)
    }

    pub fn apply(&self, value: f64, index: Option<usize>) -> Result<f64> {
        if !value.is_finite() {
            return Err(Error::NonPositiveBenefit { index, value });
        }
        match *self {
            Positivity::Strict if value > 0.0 => Ok(value),
            Positivity::Strict => Err(Error::NonPositiveBenefit { index, value }),
            Positivity::Floor(eps) => Ok(value.max(eps)),
        }
    }
}

/// Benefit of one individual; rejects non-positive values.
pub fn evaluate_benefit(spec: &BenefitSpec, y: f64, y_hat: f64) -> Result<f64> {
    evaluate_benefit_with(spec, y, y_hat, Positivity::Strict)
}

pub fn evaluate_benefit_with(
    spec: &BenefitSpec,
    y: f64,
    y_hat: f64,
    positivity: Positivity,
) -> Result<f64> {
    positivity.apply(spec.raw(y, y_hat)?, None)
}

/// Prescribed benefits for each `(y, y_hat)` pair of a binary task. Entry
/// `b_yz` is the benefit for ground truth `y` and prediction `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinaryBenefitTable {
    pub b00: f64,
    pub b01: f64,
    pub b10: f64,
    pub b11: f64,
}

impl BinaryBenefitTable {
    pub const fn new(b00: f64, b01: f64, b10: f64, b11: f64) -> Self {
        BinaryBenefitTable { b00, b01, b10, b11 }
    }

    /// Whether the table reflects a signed discrepancy between prediction
    /// and ground truth: `b10 < b00 <= b11 < b01`. Advisory only.
    pub fn satisfies_ordering(&self) -> bool {
        self.b10 < self.b00 && self.b00 <= self.b11 && self.b11 < self.b01
    }
}

/// Fits the affine benefit on `{0, 1}` labels that reproduces every table entry.
pub fn fit_binary_benefit(table: &BinaryBenefitTable) -> BenefitSpec {
    BenefitSpec::Binary {
        domain: LabelDomain::Binary01,
        negative: Affine::new(table.b01 - table.b00, table.b00),
        positive: Affine::new(table.b11 - table.b10, table.b10),
    }
}

/// Same as [`fit_binary_benefit`] for `{-1, +1}` labels and predictions; the
/// table's "0" entries refer to -1. Predictions are mapped through
/// `z = (y_hat + 1) / 2` onto the `{0, 1}` fit.
pub fn fit_binary_benefit_pm1(table: &BinaryBenefitTable) -> BenefitSpec {
    let half = |a: Affine| Affine::new(a.slope / 2.0, a.slope / 2.0 + a.offset);
    match fit_binary_benefit(table) {
        BenefitSpec::Binary {
            negative, positive, ..
        } => BenefitSpec::Binary {
            domain: LabelDomain::BinaryPm1,
            negative: half(negative),
            positive: half(positive),
        },
        BenefitSpec::Regression => unreachable!(),
    }
}

/// Strictly positive benefits of a population, with their mean.
#[derive(Debug, Clone, PartialEq)]
pub struct BenefitProfile {
    values: Vec<f64>,
    mean: f64,
}

impl BenefitProfile {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyProfile);
        }
        if let Some((i, &v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(Error::NonPositiveBenefit {
                index: Some(i),
                value: v,
            });
        }
        let mean = math::mean(&values);
        Ok(BenefitProfile { values, mean })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Every benefit multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        BenefitProfile::new(self.values.iter().map(|v| v * factor).collect())
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// `b_i = b(y_i, y_hat_i)` for every individual.
pub fn build_profile(
    predictions: &[f64],
    labels: &[f64],
    spec: &BenefitSpec,
    positivity: Positivity,
) -> Result<BenefitProfile> {
    Error::check_len(labels.len(), predictions.len())?;
    if predictions.is_empty() {
        return Err(Error::EmptyProfile);
    }
    let values = predictions
        .iter()
        .zip(labels)
        .enumerate()
        .map(|(i, (&p, &y))| positivity.apply(spec.raw(y, p)?, Some(i)))
        .collect::<Result<Vec<_>>>()?;
    BenefitProfile::new(values)
}

/// `a` Pareto-dominates `b` when every individual is at least as well off.
pub fn pareto_dominates(a: &BenefitProfile, b: &BenefitProfile) -> Result<bool> {
    Error::check_len(a.len(), b.len())?;
    Ok(a.values.iter().zip(&b.values).all(|(x, y)| x >= y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn profile(v: &[f64]) -> BenefitProfile {
        BenefitProfile::new(v.to_vec()).unwrap()
    }

    #[test]
    fn classification_default_values() {
        let spec = BenefitSpec::classification_default();
        assert_eq!(evaluate_benefit(&spec, 1.0, 1.0).unwrap(), 1.0);
        assert_eq!(evaluate_benefit(&spec, -1.0, 1.0).unwrap(), 1.5);
        assert_eq!(evaluate_benefit(&spec, -1.0, -1.0).unwrap(), 1.0);
        // false negatives get exactly zero
        assert!(matches!(
            evaluate_benefit(&spec, 1.0, -1.0),
            Err(Error::NonPositiveBenefit { value, .. }) if value == 0.0
        ));
        let floored = evaluate_benefit_with(&spec, 1.0, -1.0, Positivity::floor()).unwrap();
        assert_eq!(floored, 1e-8);
    }

    #[test]
    fn unknown_label() {
        let spec = BenefitSpec::classification_default();
        assert_eq!(evaluate_benefit(&spec, 0.0, 1.0), Err(Error::UnknownLabel(0.0)));
        let spec01 = fit_binary_benefit(&BinaryBenefitTable::new(1.0, 1.5, 0.1, 1.0));
        assert_eq!(evaluate_benefit(&spec01, -1.0, 1.0), Err(Error::UnknownLabel(-1.0)));
    }

    #[test]
    fn regression_values() {
        let spec = BenefitSpec::regression();
        assert_eq!(evaluate_benefit(&spec, 0.3, 0.3).unwrap(), 1.0);
        assert!((evaluate_benefit(&spec, 0.2, 0.5).unwrap() - 1.3).abs() < 1e-15);
        assert!(evaluate_benefit(&spec, 2.0, 0.5).is_err());
    }

    #[test]
    fn fit_examples() {
        let reproduce = |t: BinaryBenefitTable| {
            let s = fit_binary_benefit(&t);
            for (y, z, want) in [
                (0.0, 0.0, t.b00),
                (0.0, 1.0, t.b01),
                (1.0, 0.0, t.b10),
                (1.0, 1.0, t.b11),
            ] {
                assert_eq!(s.raw(y, z).unwrap(), want);
            }
            s
        };
        let s = reproduce(BinaryBenefitTable::new(1.0, 1.5, 0.0, 1.0));
        assert_eq!(
            s,
            BenefitSpec::Binary {
                domain: LabelDomain::Binary01,
                negative: Affine::new(0.5, 1.0),
                positive: Affine::new(1.0, 0.0)
            }
        );
        let s = reproduce(BinaryBenefitTable::new(1.0, 1.0, 1.0, 1.0));
        assert_eq!(s.affine_for(0.0).unwrap(), Affine::new(0.0, 1.0));
        assert_eq!(s.affine_for(1.0).unwrap(), Affine::new(0.0, 1.0));
        let s = reproduce(BinaryBenefitTable::new(0.5, 2.0, 0.2, 1.0));
        assert_eq!(s.affine_for(0.0).unwrap(), Affine::new(1.5, 0.5));
        assert_eq!(s.affine_for(1.0).unwrap(), Affine::new(0.8, 0.2));
    }

    #[test]
    fn pm1_shim_recovers_classification_default() {
        // -1 plays the role of 0 in the table
        let table = BinaryBenefitTable::new(1.0, 1.5, 0.0, 1.0);
        assert!(table.satisfies_ordering());
        assert_eq!(fit_binary_benefit_pm1(&table), BenefitSpec::classification_default());
    }

    #[test]
    fn ordering_is_advisory() {
        let t = BinaryBenefitTable::new(1.0, 0.5, 2.0, 1.0);
        assert!(!t.satisfies_ordering());
        let _ = fit_binary_benefit(&t);
    }

    #[test]
    fn build_profile_examples() {
        let spec = BenefitSpec::regression();
        let ones = [1.0; 4];
        let a = build_profile(&[0.9; 4], &ones, &spec, Positivity::Strict).unwrap();
        assert_eq!(a.values(), &[0.9; 4]);
        assert!((a.mean() - 0.9).abs() < 1e-12);
        let b = build_profile(&[0.6, 1.0, 1.0, 1.1], &ones, &spec, Positivity::Strict).unwrap();
        assert!((b.mean() - 0.925).abs() < 1e-12);
        for (x, y) in b.values().iter().zip([0.6, 1.0, 1.0, 1.1]) {
            assert!((x - y).abs() < 1e-12);
        }
        assert_eq!(
            build_profile(&[], &[], &spec, Positivity::Strict),
            Err(Error::EmptyProfile)
        );
        let err = build_profile(&[1.0, -0.5], &[0.0, 1.0], &spec, Positivity::Strict);
        assert!(matches!(err, Err(Error::NonPositiveBenefit { index: Some(1), .. })));
        assert!(matches!(
            build_profile(&[1.0], &[1.0, 1.0], &spec, Positivity::Strict),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn pareto_examples() {
        assert!(pareto_dominates(&profile(&[1.0, 2.0]), &profile(&[1.0, 1.0])).unwrap());
        assert!(pareto_dominates(&profile(&[1.0, 1.0]), &profile(&[1.0, 1.0])).unwrap());
        let a = profile(&[0.9; 4]);
        let b = profile(&[0.6, 1.0, 1.0, 1.1]);
        assert!(!pareto_dominates(&a, &b).unwrap());
        assert!(!pareto_dominates(&b, &a).unwrap());
        assert!(pareto_dominates(&a, &profile(&[1.0])).is_err());
    }

    #[test]
    fn profile_invariants() {
        assert_eq!(BenefitProfile::new(vec![]), Err(Error::EmptyProfile));
        assert!(BenefitProfile::new(vec![1.0, 0.0]).is_err());
        assert!(BenefitProfile::new(vec![1.0, f64::NAN]).is_err());
        let p = profile(&[0.3, 0.7, 1.9]);
        let recomputed: f64 = p.values().iter().sum::<f64>() / 3.0;
        assert!((p.mean() - recomputed).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn fitted_table_reproduces_entries(
            b00 in -5.0f64..5.0, b01 in -5.0f64..5.0, b10 in -5.0f64..5.0, b11 in -5.0f64..5.0
        ) {
            let t = BinaryBenefitTable::new(b00, b01, b10, b11);
            let s = fit_binary_benefit(&t);
            prop_assert_eq!(s.raw(0.0, 0.0).unwrap(), b00);
            prop_assert_eq!(s.raw(1.0, 0.0).unwrap(), b10);
            // (b01 - b00) + b00 need not round back to b01 exactly
            prop_assert!((s.raw(0.0, 1.0).unwrap() - b01).abs() <= 1e-15 * (1.0 + b01.abs() + b00.abs()));
            prop_assert!((s.raw(1.0, 1.0).unwrap() - b11).abs() <= 1e-15 * (1.0 + b11.abs() + b10.abs()));
        }

        #[test]
        fn benefit_is_affine(y in -2.0f64..2.0, p1 in -3.0f64..3.0, p2 in -3.0f64..3.0, t in 0.0f64..=1.0) {
            for spec in [BenefitSpec::regression(), BenefitSpec::classification_default()] {
                let y = if spec == BenefitSpec::regression() { y } else if y > 0.0 { 1.0 } else { -1.0 };
                let lhs = spec.raw(y, t * p1 + (1.0 - t) * p2).unwrap();
                let rhs = t * spec.raw(y, p1).unwrap() + (1.0 - t) * spec.raw(y, p2).unwrap();
                prop_assert!((lhs - rhs).abs() < 1e-12);
            }
        }

        #[test]
        fn pareto_is_a_partial_order(
            a in proptest::collection::vec(0.1f64..2.0, 3),
            b in proptest::collection::vec(0.1f64..2.0, 3),
            c in proptest::collection::vec(0.1f64..2.0, 3),
        ) {
            // round to a coarse grid so that dominance relations actually occur
            let q = |v: Vec<f64>| profile(&v.iter().map(|x| (x * 4.0).round().max(1.0) / 4.0).collect::<Vec<_>>());
            let (a, b, c) = (q(a), q(b), q(c));
            prop_assert!(pareto_dominates(&a, &a).unwrap());
            if pareto_dominates(&a, &b).unwrap() && pareto_dominates(&b, &a).unwrap() {
                prop_assert_eq!(a.values(), b.values());
            }
            if pareto_dominates(&a, &b).unwrap() && pareto_dominates(&b, &c).unwrap() {
                prop_assert!(pareto_dominates(&a, &c).unwrap());
            }
        }
    }
}
