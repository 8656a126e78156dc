//! Welfare-based fairness measures and welfare-constrained learning of
//! linear predictors.
//!
//! The crate is `no_std` and only needs `alloc`. IO, file formats and the
//! command-line front end live in the companion `welfair` crate.
//!
//! Module map:
//!
//! * [`benefits`]: benefit functions linear in the prediction, benefit profiles.
//! * [`welfare`]: CRRA utilities, empirical welfare, EDE, Atkinson and
//!   generalized-entropy indices, leximin, model ranking.
//! * [`fairmetrics`]: Dwork-style average violation and group metrics.
//! * [`dataset`]: homogeneous datasets, preprocessing, synthetic data, folds.
//! * [`optim`]: damped Newton, sphere-projected gradient, dual bisection.
//! * [`solver`]: welfare-constrained regression and classification.
//! * [`mechanisms`]: heuristics bounding Dwork violation and generalized entropy.
#![no_std]
#![deny(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod benefits;
pub mod dataset;
pub mod error;
pub mod fairmetrics;
mod math;
pub mod mechanisms;
pub mod optim;
pub mod solver;
pub mod welfare;

pub use benefits::{
    build_profile, evaluate_benefit, fit_binary_benefit, pareto_dominates, Affine, BenefitProfile,
    BenefitSpec, BinaryBenefitTable, LabelDomain, Positivity,
};
pub use dataset::{Dataset, GroupAssignment, GroupId, Task};
pub use error::{Error, Result};
pub use solver::{LinearModel, SolveResult, SolveStatus, SolverConfig};

/// Default lower floor applied to benefits when flooring is requested.
pub const DEFAULT_BENEFIT_FLOOR: f64 = 1e-8;
