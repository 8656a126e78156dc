//! CRRA utilities, the one-parameter welfare family and the inequality
//! indices it is compared against.
//!
//! For `alpha > 0` the per-person utility is `b^alpha`, for `alpha = 0` it is
//! `ln b` and for `alpha < 0` it is `-b^alpha`. Welfare is either the sum of
//! utilities or their mean (the empirical expected utility of a randomly
//! drawn individual).
//!
//! The Atkinson index `A_beta = 1 - EDE / mean` uses the power mean of order
//! `1 - beta` as the equally distributed equivalent, so for equal-mean
//! profiles `A_{1-alpha}` and `W_alpha` induce opposite orderings. The
//! generalized entropy index `G_alpha` is tied to it through
//! `A_{1-alpha} = 1 - (alpha (alpha - 1) G_alpha + 1)^(1/alpha)`.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::benefits::BenefitProfile;
use crate::error::{Error, Result};
use crate::math;

/// Whether welfare is a sum of utilities or their mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Convention {
    #[default]
    Mean,
    Sum,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelfareParams {
    pub alpha: f64,
    pub convention: Convention,
}

impl WelfareParams {
    pub fn mean(alpha: f64) -> Self {
        WelfareParams {
            alpha,
            convention: Convention::Mean,
        }
    }

    pub fn sum(alpha: f64) -> Self {
        WelfareParams {
            alpha,
            convention: Convention::Sum,
        }
    }
}

/// Parameters of the inequality indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityParams {
    pub beta: f64,
    pub ge_alpha: f64,
}

impl Default for InequalityParams {
    fn default() -> Self {
        InequalityParams {
            beta: 0.5,
            ge_alpha: 2.0,
        }
    }
}

/// `w_alpha(b)`. Powers go through `exp(alpha ln b)`.
pub fn crra_utility(b: f64, alpha: f64) -> Result<f64> {
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::NonPositiveBenefit {
            index: None,
            value: b,
        });
    }
    if !alpha.is_finite() {
        return Err(Error::UnsupportedAlpha(alpha));
    }
    let u = if alpha == 0.0 {
        math::ln(b)
    } else {
        let p = math::exp(alpha * math::ln(b));
        if alpha > 0.0 {
            p
        } else {
            -p
        }
    };
    Ok(u)
}

/// Utilities are summed in ascending order, so the result is exactly
/// invariant under permutations of the profile.
pub fn empirical_welfare(profile: &BenefitProfile, params: WelfareParams) -> Result<f64> {
    let mut utilities = profile
        .values()
        .iter()
        .map(|&b| crra_utility(b, params.alpha))
        .collect::<Result<Vec<_>>>()?;
    utilities.sort_unstable_by(f64::total_cmp);
    let total: f64 = utilities.iter().sum();
    Ok(match params.convention {
        Convention::Sum => total,
        Convention::Mean => total / profile.len() as f64,
    })
}

/// Power mean of order `p`; `p = 0` is the geometric mean.
fn power_mean(values: &[f64], p: f64) -> f64 {
    let n = values.len() as f64;
    if p == 0.0 {
        let mean_log = values.iter().map(|&b| math::ln(b)).sum::<f64>() / n;
        math::exp(mean_log)
    } else {
        let m = values.iter().map(|&b| math::exp(p * math::ln(b))).sum::<f64>() / n;
        math::exp(math::ln(m) / p)
    }
}

/// Equally distributed equivalent: the constant benefit with the same mean
/// CRRA utility, `((1/n) sum b_i^alpha)^(1/alpha)`, for `0 < alpha < 1`.
pub fn ede(profile: &BenefitProfile, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::UnsupportedAlpha(alpha));
    }
    Ok(power_mean(profile.values(), alpha))
}

/// Atkinson index with inequality aversion `beta >= 0`.
pub fn atkinson(profile: &BenefitProfile, beta: f64) -> Result<f64> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::param("atkinson beta must be finite and >= 0"));
    }
    let equivalent = power_mean(profile.values(), 1.0 - beta);
    Ok((1.0 - equivalent / profile.mean()).max(0.0))
}

/// Generalized entropy `G_alpha = 1/(n alpha (alpha-1)) sum[(b_i/mu)^alpha - 1]`.
pub fn generalized_entropy(profile: &BenefitProfile, alpha: f64) -> Result<f64> {
    if alpha == 0.0 || alpha == 1.0 || !alpha.is_finite() {
        return Err(Error::UnsupportedAlpha(alpha));
    }
    let mu = profile.mean();
    let n = profile.len() as f64;
    let s: f64 = profile
        .values()
        .iter()
        .map(|&b| math::pow(b / mu, alpha) - 1.0)
        .sum();
    Ok((s / (n * alpha * (alpha - 1.0))).max(0.0))
}

/// Lexicographic comparison of the ascending-sorted profiles (the
/// `alpha -> -infinity` limit of the welfare family).
pub fn leximin_compare(a: &BenefitProfile, b: &BenefitProfile) -> Result<Ordering> {
    Error::check_len(a.len(), b.len())?;
    let sorted = |p: &BenefitProfile| {
        let mut v = p.values().to_vec();
        v.sort_by(f64::total_cmp);
        v
    };
    let (sa, sb) = (sorted(a), sorted(b));
    for (x, y) in sa.iter().zip(&sb) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return Ok(o),
        }
    }
    Ok(Ordering::Equal)
}

/// Score used to rank models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Measure {
    /// Mean CRRA welfare; higher is better.
    Welfare { alpha: f64 },
    /// Atkinson index; lower is better.
    Atkinson { beta: f64 },
    /// Generalized entropy; lower is better.
    GeneralizedEntropy { alpha: f64 },
}

impl Measure {
    pub fn score(&self, profile: &BenefitProfile) -> Result<f64> {
        match *self {
            Measure::Welfare { alpha } => empirical_welfare(profile, WelfareParams::mean(alpha)),
            Measure::Atkinson { beta } => atkinson(profile, beta),
            Measure::GeneralizedEntropy { alpha } => generalized_entropy(profile, alpha),
        }
    }

    pub fn higher_is_better(&self) -> bool {
        matches!(self, Measure::Welfare { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedModel {
    pub name: String,
    pub score: f64,
}

/// Ranks named profiles, best first. Welfare sorts descending, inequality
/// indices ascending; equal scores fall back to name order.
pub fn rank_models<S: AsRef<str>>(
    profiles: &[(S, BenefitProfile)],
    measure: Measure,
) -> Result<Vec<RankedModel>> {
    if let Some((_, first)) = profiles.first() {
        for (_, p) in profiles {
            Error::check_len(first.len(), p.len())?;
        }
    }
    let mut ranked = profiles
        .iter()
        .map(|(name, p)| {
            Ok(RankedModel {
                name: String::from(name.as_ref()),
                score: measure.score(p)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let descending = measure.higher_is_better();
    ranked.sort_by(|a, b| {
        let by_score = if descending {
            b.score.total_cmp(&a.score)
        } else {
            a.score.total_cmp(&b.score)
        };
        by_score.then_with(|| a.name.cmp(&b.name))
    });
    Ok(ranked)
}
