//! Grid sweeps over `(alpha, tau)` with optional cross validation.
//!
//! Cells run on a rayon pool; results are collected and sorted, so the
//! output does not depend on scheduling.

use rayon::prelude::*;
use welfair_core::dataset::kfold_split;
use welfair_core::fairmetrics::{full_report, ReportSpec};
use welfair_core::solver::{solve_constrained, ConstraintSpec};
use welfair_core::{BenefitSpec, Dataset, Error as CoreError, LinearModel, SolverConfig, Task};

use crate::error::{is_solver_failure, CliError, Result};
use crate::results::{cell_order, ResultRow};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub alphas: Vec<f64>,
    pub taus: Vec<f64>,
    /// 1 trains and evaluates every cell on the full data.
    pub folds: usize,
    pub seed: u64,
    pub solver: SolverConfig,
    /// Classification benefit; regression always uses `y_hat - y + 1`.
    pub benefit: BenefitSpec,
}

#[derive(Debug, Clone)]
pub struct CellOutcome {
    pub row: ResultRow,
    pub model: Option<LinearModel>,
    pub constraint: ConstraintSpec,
    /// The solver error behind a failed row.
    pub failure: Option<CoreError>,
}

pub fn constraint_for(task: Task, alpha: f64, tau: f64, benefit: BenefitSpec) -> ConstraintSpec {
    match task {
        Task::Regression => ConstraintSpec::regression(alpha, tau),
        Task::Classification => ConstraintSpec {
            benefit,
            ..ConstraintSpec::classification(alpha, tau)
        },
    }
}

/// Report settings matching the training constraint.
pub fn report_spec(task: Task, alpha: f64, benefit: BenefitSpec) -> ReportSpec {
    let mut spec = ReportSpec::for_task(task, alpha);
    if task == Task::Classification {
        spec.benefit = benefit;
    }
    spec
}

/// Trains on `train`, reports on `test`. Solver failures become a failed
/// row; data and parameter errors are returned.
pub fn run_cell(
    train: &Dataset,
    test: &Dataset,
    alpha: f64,
    tau: f64,
    fold: usize,
    solver: &SolverConfig,
    benefit: BenefitSpec,
) -> Result<CellOutcome> {
    let constraint = constraint_for(train.task(), alpha, tau, benefit);
    match solve_constrained(train, &constraint, solver) {
        Ok(solve) => {
            let pred = solve.model.predict(test)?;
            let report = full_report(test, &pred, test.groups(), &report_spec(test.task(), alpha, benefit))?;
            Ok(CellOutcome {
                row: ResultRow::from_solve(alpha, tau, fold, &solve, &report),
                model: Some(solve.model),
                constraint,
                failure: None,
            })
        }
        Err(e) if is_solver_failure(&e) => Ok(CellOutcome {
            row: ResultRow::failed(alpha, tau, fold, CliError::Core(e.clone()).kind()),
            model: None,
            constraint,
            failure: Some(e),
        }),
        Err(e) => Err(e.into()),
    }
}

/// Runs every cell on a pool of `jobs` threads (0 = one per processor).
/// Outcomes are sorted by `(alpha, tau, fold)`.
pub fn run_sweep(dataset: &Dataset, plan: &SweepPlan, jobs: usize) -> Result<Vec<CellOutcome>> {
    if plan.alphas.is_empty() || plan.taus.is_empty() {
        return Err(CliError::Config("alpha and tau lists must be non-empty".into()));
    }
    let splits: Vec<(Dataset, Dataset)> = if plan.folds <= 1 {
        vec![(dataset.clone(), dataset.clone())]
    } else {
        kfold_split(dataset.n(), plan.folds, plan.seed)?
            .into_iter()
            .map(|f| (dataset.subset(&f.train), dataset.subset(&f.test)))
            .collect()
    };
    let cells: Vec<(f64, f64, usize)> = plan
        .alphas
        .iter()
        .flat_map(|&a| plan.taus.iter().map(move |&t| (a, t)))
        .flat_map(|(a, t)| (0..splits.len()).map(move |f| (a, t, f)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    let mut out = pool.install(|| {
        cells
            .par_iter()
            .map(|&(a, t, f)| {
                let (train, test) = &splits[f];
                run_cell(train, test, a, t, f, &plan.solver, plan.benefit)
            })
            .collect::<Vec<_>>()
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    out.sort_by(|x, y| cell_order(&x.row, &y.row));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use welfair_core::dataset::gen_realizable;

    fn plan(taus: Vec<f64>, folds: usize) -> SweepPlan {
        SweepPlan {
            alphas: vec![0.8, 0.5],
            taus,
            folds,
            seed: 3,
            solver: SolverConfig::default(),
            benefit: BenefitSpec::regression(),
        }
    }

    #[test]
    fn sorted_and_schedule_independent() {
        let (ds, _) = gen_realizable(40, 3, 1, 1.0).unwrap();
        let p = plan(vec![2.0, 0.5, 1.5], 1);
        let one = run_sweep(&ds, &p, 1).unwrap();
        let many = run_sweep(&ds, &p, 4).unwrap();
        let rows = |v: &[CellOutcome]| v.iter().map(|c| c.row.clone()).collect::<Vec<_>>();
        assert_eq!(rows(&one), rows(&many));
        let keys: Vec<_> = one.iter().map(|c| (c.row.alpha, c.row.tau)).collect();
        assert_eq!(keys, [(0.5, 0.5), (0.5, 1.5), (0.5, 2.0), (0.8, 0.5), (0.8, 1.5), (0.8, 2.0)]);
        assert!(one.iter().all(|c| c.row.status == "optimal"));
    }

    #[test]
    fn folds_produce_one_row_per_fold() {
        let (ds, _) = gen_realizable(30, 3, 2, 1.0).unwrap();
        let out = run_sweep(&ds, &plan(vec![1.0], 3), 0).unwrap();
        assert_eq!(out.len(), 6);
        assert_eq!(out.iter().map(|c| c.row.fold).collect::<Vec<_>>(), [0, 1, 2, 0, 1, 2]);
    }

    #[test]
    fn infeasible_cells_are_recorded() {
        let (ds, _) = gen_realizable(30, 3, 2, 1.0).unwrap();
        let mut ds = ds;
        // Classification with an unreachable bound.
        let labels: Vec<f64> = ds.labels().iter().map(|&y| if y > 0.0 { 1.0 } else { -1.0 }).collect();
        ds = Dataset::new(ds.features().to_vec(), ds.k(), labels, Task::Classification, ds.column_names().to_vec()).unwrap();
        let p = SweepPlan {
            benefit: BenefitSpec::classification_default(),
            solver: SolverConfig { restarts: 2, ..SolverConfig::default() },
            ..plan(vec![0.5, 50.0], 1)
        };
        let out = run_sweep(&ds, &p, 2).unwrap();
        for c in &out {
            if c.row.tau == 50.0 {
                assert_eq!(c.row.status, "infeasible");
                assert!(c.model.is_none() && c.row.loss.is_none());
            } else {
                assert!(c.row.succeeded());
            }
        }
    }
}
