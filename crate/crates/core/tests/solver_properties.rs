use proptest::prelude::*;
use welfair_core::dataset::{gen_synthetic, SyntheticSpec};
use welfair_core::solver::{
    constraint_value, kkt_residuals, mean_loss, solve_constrained_regression, solve_unconstrained,
    ConstraintSpec,
};
use welfair_core::{SolveStatus, SolverConfig};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn regression_solutions_are_feasible_and_optimal(
        seed in 0u64..10_000,
        n in 20usize..80,
        k in 2usize..5,
        alpha in 0.1f64..0.9,
        lift in 0.0f64..1.5,
    ) {
        let (ds, _) = gen_synthetic(&SyntheticSpec::regression(n, k, seed)).unwrap();
        let cfg = SolverConfig::default();
        let ls = solve_unconstrained(&ds, &cfg).unwrap();
        let base = constraint_value(&ds, &ConstraintSpec::regression(alpha, 1.0), &ls, cfg.benefit_floor).unwrap();
        let spec = ConstraintSpec::regression(alpha, base + lift);
        let r = solve_constrained_regression(&ds, &spec, &cfg).unwrap();
        prop_assert_eq!(r.status, SolveStatus::Optimal);
        prop_assert!(r.constraint_value >= spec.tau - cfg.tol_c);
        prop_assert!(r.loss >= mean_loss(&ds, ls.weights()) - 1e-12);
        prop_assert!((r.loss - mean_loss(&ds, r.model.weights())).abs() <= 1e-12 * (1.0 + r.loss));
        let kkt = kkt_residuals(&ds, &spec, &r.model, r.lambda).unwrap();
        prop_assert!(kkt.max() <= 1e-5 * (1.0 + r.lambda), "kkt {:?}", kkt);
        if lift == 0.0 {
            prop_assert_eq!(r.lambda, 0.0);
        }
    }

    #[test]
    fn row_order_does_not_change_the_optimum(seed in 0u64..10_000, alpha in 0.2f64..0.8) {
        let (ds, _) = gen_synthetic(&SyntheticSpec::regression(40, 3, seed)).unwrap();
        let cfg = SolverConfig::default();
        let ls = solve_unconstrained(&ds, &cfg).unwrap();
        let base = constraint_value(&ds, &ConstraintSpec::regression(alpha, 1.0), &ls, cfg.benefit_floor).unwrap();
        let spec = ConstraintSpec::regression(alpha, base + 0.5);
        let order: Vec<usize> = (0..ds.n()).rev().collect();
        let a = solve_constrained_regression(&ds, &spec, &cfg).unwrap();
        let b = solve_constrained_regression(&ds.subset(&order), &spec, &cfg).unwrap();
        prop_assert!((a.loss - b.loss).abs() <= 1e-8 * (1.0 + a.loss));
        for (x, y) in a.model.weights().iter().zip(b.model.weights()) {
            prop_assert!((x - y).abs() <= 1e-5 * (1.0 + x.abs()));
        }
    }
}
