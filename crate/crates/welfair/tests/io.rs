use std::path::Path;

use tempfile::TempDir;
use welfair::config::ExperimentConfig;
use welfair::csvio::{load_csv, load_predictions, save_dataset, save_predictions, CsvSchema, GROUP_COLUMN};
use welfair::model_io::{ConstraintEcho, ModelFile};
use welfair::results::{load_results, save_results, ResultRow};
use welfair_core::dataset::{gen_synthetic, SyntheticSpec};
use welfair_core::solver::{LinearModel, SolveStatus};
use welfair_core::Task;

#[test]
fn dataset_round_trip_is_bit_exact() {
    let tmp = TempDir::new().unwrap();
    for spec in [SyntheticSpec::regression(64, 4, 9), SyntheticSpec::classification(64, 3, 9)] {
        let (ds, _) = gen_synthetic(&spec).unwrap();
        let path = tmp.path().join("d.csv");
        save_dataset(&path, &ds, "target").unwrap();
        let mut schema = CsvSchema::new("target", spec.task);
        schema.group = Some(GROUP_COLUMN.to_string());
        let back = load_csv(&path, &schema).unwrap();
        assert_eq!(back.rejected_rows, 0);
        let back = back.dataset;
        assert_eq!(back.column_names(), ds.column_names());
        assert_eq!(back.groups(), ds.groups());
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(back.features()), bits(ds.features()));
        assert_eq!(bits(back.labels()), bits(ds.labels()));
    }
}

#[test]
fn model_round_trip() {
    let tmp = TempDir::new().unwrap();
    let path = tmp.path().join("m.toml");
    let mut m = ModelFile::new(Task::Regression, &LinearModel::new(vec![0.1 + 0.2, -1e-300, 15.0]).unwrap())
        .with_status(SolveStatus::Optimal);
    m.lambda = Some(240.0);
    m.columns = vec!["a".into(), "b".into(), "intercept".into()];
    m.constraint = Some(ConstraintEcho { alpha: 0.5, tau: 4.0, scale_c: 1.0 / 3.0 });
    m.save(&path).unwrap();
    assert_eq!(ModelFile::load(&path).unwrap(), m);

    std::fs::write(&path, m.to_toml().unwrap().replace("k = 3", "k = 2")).unwrap();
    assert!(ModelFile::load(&path).is_err());
}

#[test]
fn predictions_round_trip() {
    let tmp = TempDir::new().unwrap();
    let path = tmp.path().join("p.csv");
    let p = vec![1.0 / 3.0, -2.5e-17, 1e300, 0.0];
    save_predictions(&path, &p).unwrap();
    assert_eq!(load_predictions(&path).unwrap(), p);
}

#[test]
fn results_round_trip() {
    let tmp = TempDir::new().unwrap();
    let path = tmp.path().join("r.csv");
    let mut ok = ResultRow::failed(0.5, 2.0, 1, "optimal");
    ok.loss = Some(0.123456789012345);
    ok.lambda = Some(7.0);
    ok.mean_diff = Some(-1.0 / 7.0);
    let mut rows = vec![ok, ResultRow::failed(0.3, 9.0, 0, "infeasible")];
    save_results(&path, &mut rows).unwrap();
    assert_eq!(load_results(&path).unwrap(), rows);
    assert!(load_results(Path::new("/nonexistent/r.csv")).is_err());
}

#[test]
fn config_canonical_form_is_stable() {
    let text = r#"
alphas = [0.3, 0.5]
taus = [1.5]
folds = 3
seed = 11

[data]
path = "d.csv"
label = "y"
task = "classification"
group = "g"

[preprocess]
standardize = true
exempt = ["x1"]

[solver]
tol_c = 1e-7

[benefit]
kind = "table"
b00 = 1.0
b01 = 1.5
b10 = 0.0
b11 = 1.0
"#;
    let cfg = ExperimentConfig::from_toml(text).unwrap();
    cfg.validate().unwrap();
    let canon = cfg.to_toml().unwrap();
    let again = ExperimentConfig::from_toml(&canon).unwrap();
    assert_eq!(again, cfg);
    assert_eq!(again.to_toml().unwrap(), canon);
    assert!(ExperimentConfig::from_toml("alphas = [0.5]\nunknown = 1\n").is_err());
}
