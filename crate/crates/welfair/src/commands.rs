//! Subcommand implementations. Reports go to the given writer (standard
//! output in the binary); notes about the input go to standard error as
//! JSON lines.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::json;
use welfair_core::dataset::{gen_realizable, gen_synthetic, kfold_split, SyntheticSpec};
use welfair_core::fairmetrics::{full_report, hard_label, pairwise_distances, DistanceMode};
use welfair_core::mechanisms::{
    default_mu_grid, dwork_delta_mechanism, epsilon_net, epsilon_net_mechanism,
    speicher_mechanism, MechanismConfig,
};
use welfair_core::welfare::{rank_models, Measure};
use welfair_core::{
    build_profile, BenefitProfile, BenefitSpec, Dataset, Error as CoreError, Positivity, Task,
};

use crate::cli::{
    Cli, Command, DataArgs, GenArgs, GenKind, MeasureKind, MechanismArgs, MechanismKind,
    MetricsArgs, RankArgs, SolverArgs, SweepArgs, TrainArgs,
};
use crate::config::{BenefitSection, DataSection, ExperimentConfig};
use crate::csvio::{load_csv, load_predictions, read_column, save_dataset, GroupRuleSpec};
use crate::error::{CliError, Result};
use crate::model_io::{ConstraintEcho, ModelFile};
use crate::results::{write_metrics, write_results, MetricsRow, ResultRow};
use crate::sweep::{report_spec, run_cell, run_sweep, SweepPlan};

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    match cli.command {
        Command::Train(a) => train(cfg, a, out),
        Command::Sweep(a) => sweep(cfg, a, cli.jobs, out),
        Command::Rank(a) => rank(cfg.seed, a, out),
        Command::Metrics(a) => metrics(cfg, a, out),
        Command::Mechanism(a) => mechanism(cfg, a, out),
        Command::Gen(a) => gen(cfg.seed, a),
    }
}

fn note(value: serde_json::Value) {
    eprintln!("{value}");
}

fn parse_task(s: &str) -> Result<Task> {
    s.parse().map_err(|e: CoreError| CliError::Config(e.to_string()))
}

fn parse_group_rule(s: &str) -> Result<GroupRuleSpec> {
    let (column, threshold) = s
        .rsplit_once(':')
        .ok_or_else(|| CliError::Config(format!("group rule {s:?} is not COLUMN:THRESHOLD")))?;
    let threshold = threshold
        .parse()
        .map_err(|_| CliError::Config(format!("bad group rule threshold {threshold:?}")))?;
    Ok(GroupRuleSpec { column: column.to_string(), threshold })
}

fn benefit_table(values: &[f64]) -> BenefitSection {
    BenefitSection::Table { b00: values[0], b01: values[1], b10: values[2], b11: values[3] }
}

fn merge_data(cfg: &mut ExperimentConfig, a: &DataArgs) -> Result<()> {
    if let Some(path) = &a.data {
        match &mut cfg.data {
            Some(d) => d.path = path.clone(),
            None => {
                cfg.data = Some(DataSection {
                    path: path.clone(),
                    label: "y".into(),
                    task: Task::Regression,
                    group: None,
                    group_rule: None,
                    drop: Vec::new(),
                })
            }
        }
    }
    let overrides = a.label.is_some()
        || a.task.is_some()
        || a.group.is_some()
        || a.group_rule.is_some()
        || !a.drop.is_empty();
    match &mut cfg.data {
        Some(d) => {
            if let Some(l) = &a.label {
                d.label = l.clone();
            }
            if let Some(t) = &a.task {
                d.task = parse_task(t)?;
            }
            if let Some(g) = &a.group {
                d.group = Some(g.clone());
            }
            if let Some(r) = &a.group_rule {
                d.group_rule = Some(parse_group_rule(r)?);
            }
            if !a.drop.is_empty() {
                d.drop = a.drop.clone();
            }
        }
        None if overrides => return Err(CliError::Config("--data is required".into())),
        None => {}
    }
    let p = &mut cfg.preprocess;
    p.standardize |= a.standardize;
    p.flip_labels |= a.flip_labels;
    if !a.exempt.is_empty() {
        p.exempt = a.exempt.clone();
    }
    if a.target_rescale.is_some() {
        p.target_rescale = a.target_rescale;
    }
    Ok(())
}

fn merge_solver(cfg: &mut ExperimentConfig, a: &SolverArgs) {
    let s = &mut cfg.solver;
    s.tol_c = a.tol_c.unwrap_or(s.tol_c);
    s.tol_g = a.tol_g.unwrap_or(s.tol_g);
    s.lambda_max = a.lambda_max.unwrap_or(s.lambda_max);
    s.max_outer = a.max_outer.unwrap_or(s.max_outer);
    s.max_inner = a.max_inner.unwrap_or(s.max_inner);
    s.restarts = a.restarts.unwrap_or(s.restarts);
    if let Some(t) = &a.benefit_table {
        cfg.benefit = benefit_table(t);
    }
}

/// Loads and preprocesses the configured dataset.
pub fn load_dataset(cfg: &ExperimentConfig) -> Result<Dataset> {
    let d = cfg
        .data
        .as_ref()
        .ok_or_else(|| CliError::Config("no dataset given (--data or [data])".into()))?;
    let loaded = load_csv(&d.path, &d.schema())?;
    if loaded.rejected_rows > 0 {
        note(json!({"note": "rejected_rows", "count": loaded.rejected_rows}));
    }
    if cfg.preprocess.is_noop() {
        return Ok(loaded.dataset);
    }
    let (ds, zero) = cfg.preprocess.apply(&loaded.dataset)?;
    if !zero.is_empty() {
        note(json!({"note": "zero_variance", "columns": zero}));
    }
    Ok(ds)
}

fn single(values: &[f64], name: &str) -> Result<f64> {
    match values {
        [v] => Ok(*v),
        _ => Err(CliError::Config(format!("expected exactly one {name}, got {}", values.len()))),
    }
}

/// Sends output to `path` if given, otherwise to `out`.
fn emit(
    path: Option<&Path>,
    out: &mut dyn Write,
    write: impl FnOnce(&mut dyn Write) -> csv::Result<()>,
) -> Result<()> {
    match path {
        Some(p) => {
            let mut f = File::create(p).map_err(|e| CliError::io(p, e))?;
            write(&mut f).map_err(|e| CliError::csv(p, e))
        }
        None => write(out).map_err(|e| CliError::csv("<stdout>", e)),
    }
}

fn train(mut cfg: ExperimentConfig, a: TrainArgs, out: &mut dyn Write) -> Result<()> {
    merge_data(&mut cfg, &a.data)?;
    merge_solver(&mut cfg, &a.solver);
    if let Some(x) = a.alpha {
        cfg.alphas = vec![x];
    }
    if let Some(x) = a.tau {
        cfg.taus = vec![x];
    }
    cfg.validate()?;
    let (alpha, tau) = (single(&cfg.alphas, "alpha")?, single(&cfg.taus, "tau")?);
    let ds = load_dataset(&cfg)?;
    let benefit = cfg.benefit.spec(ds.task());
    let cell = run_cell(&ds, &ds, alpha, tau, 0, &cfg.solver_config(), benefit)?;
    let model = match (cell.model, cell.failure) {
        (Some(m), _) => m,
        (None, Some(e)) => return Err(e.into()),
        (None, None) => return Err(CliError::Internal("cell produced neither model nor error".into())),
    };
    let mut file = ModelFile::new(ds.task(), &model);
    file.status = Some(cell.row.status.clone());
    file.lambda = cell.row.lambda;
    file.columns = ds.column_names().to_vec();
    file.constraint = Some(ConstraintEcho::from(&cell.constraint));
    file.save(&a.out)?;
    let output = a.output.or(cfg.output);
    emit(output.as_deref(), out, |w| write_results(w, &mut [cell.row]))
}

fn sweep(mut cfg: ExperimentConfig, a: SweepArgs, jobs: usize, out: &mut dyn Write) -> Result<()> {
    merge_data(&mut cfg, &a.data)?;
    merge_solver(&mut cfg, &a.solver);
    if !a.alphas.is_empty() {
        cfg.alphas = a.alphas;
    }
    if !a.taus.is_empty() {
        cfg.taus = a.taus;
    }
    if let Some(f) = a.folds {
        cfg.folds = f;
    }
    cfg.validate()?;
    let ds = load_dataset(&cfg)?;
    let plan = SweepPlan {
        alphas: cfg.alphas.clone(),
        taus: cfg.taus.clone(),
        folds: cfg.folds,
        seed: cfg.seed,
        solver: cfg.solver_config(),
        benefit: cfg.benefit.spec(ds.task()),
    };
    let cells = run_sweep(&ds, &plan, jobs)?;
    if let Some(dir) = &a.models_dir {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        for c in &cells {
            if let Some(m) = &c.model {
                let mut f = ModelFile::new(ds.task(), m);
                f.status = Some(c.row.status.clone());
                f.lambda = c.row.lambda;
                f.columns = ds.column_names().to_vec();
                f.constraint = Some(ConstraintEcho::from(&c.constraint));
                f.save(&dir.join(model_file_name(c.row.alpha, c.row.tau, c.row.fold)))?;
            }
        }
    }
    let any_ok = cells.iter().any(|c| c.row.succeeded());
    let mut rows: Vec<ResultRow> = cells.into_iter().map(|c| c.row).collect();
    let output = a.output.or(cfg.output);
    emit(output.as_deref(), out, |w| write_results(w, &mut rows))?;
    if any_ok {
        Ok(())
    } else {
        Err(CoreError::AllInfeasible.into())
    }
}

/// File name of the model saved for one sweep cell.
pub fn model_file_name(alpha: f64, tau: f64, fold: usize) -> String {
    format!("alpha{alpha}_tau{tau}_fold{fold}.toml")
}

fn file_label(p: &Path) -> String {
    p.file_name().map_or_else(|| p.display().to_string(), |n| n.to_string_lossy().into_owned())
}

fn rank(seed: u64, a: RankArgs, out: &mut dyn Write) -> Result<()> {
    let task = parse_task(&a.task)?;
    let measure = match a.measure {
        MeasureKind::Welfare => Measure::Welfare { alpha: a.alpha },
        MeasureKind::Atkinson => Measure::Atkinson { beta: a.beta.unwrap_or(1.0 - a.alpha) },
        MeasureKind::Ge => Measure::GeneralizedEntropy { alpha: a.alpha },
    };
    let benefit = match (&a.benefit_table, task) {
        (_, Task::Regression) => BenefitSpec::regression(),
        (Some(t), _) => benefit_table(t).spec(task),
        (None, _) => BenefitSpec::classification_default(),
    };
    let labels = match &a.labels {
        Some(p) => {
            let f = File::open(p).map_err(|e| CliError::io(p, e))?;
            Some(read_column(f, &a.label_column, p)?)
        }
        None => None,
    };
    let mut profiles = Vec::with_capacity(a.predictions.len());
    for path in &a.predictions {
        let mut pred = load_predictions(path)?;
        let profile = match &labels {
            Some(y) => {
                if y.len() != pred.len() {
                    return Err(CliError::Config(format!(
                        "{}: {} predictions but {} labels",
                        path.display(),
                        pred.len(),
                        y.len()
                    )));
                }
                if task == Task::Classification {
                    pred.iter_mut().for_each(|p| *p = hard_label(*p));
                }
                build_profile(&pred, y, &benefit, Positivity::Strict)?
            }
            None => BenefitProfile::new(pred)?,
        };
        profiles.push((file_label(path), profile));
    }
    let n = profiles[0].1.len();
    if let Some((name, p)) = profiles.iter().find(|(_, p)| p.len() != n) {
        return Err(CliError::Config(format!("{name}: {} values, expected {n}", p.len())));
    }
    let mut w = csv::Writer::from_writer(out);
    let wrap = |e| CliError::csv("<stdout>", e);
    w.write_record(["rank", "model", "fold", "score"]).map_err(wrap)?;
    for (i, r) in rank_models(&profiles, measure)?.iter().enumerate() {
        w.write_record([&(i + 1).to_string(), &r.name, "all", &r.score.to_string()])
            .map_err(wrap)?;
    }
    if let Some(folds) = a.folds {
        for (f, fold) in kfold_split(n, folds, seed)?.iter().enumerate() {
            let sub = profiles
                .iter()
                .map(|(name, p)| {
                    let v = fold.test.iter().map(|&i| p.values()[i]).collect();
                    Ok((name.clone(), BenefitProfile::new(v)?))
                })
                .collect::<Result<Vec<_>>>()?;
            for (i, r) in rank_models(&sub, measure)?.iter().enumerate() {
                w.write_record([&(i + 1).to_string(), &r.name, &f.to_string(), &r.score.to_string()])
                    .map_err(wrap)?;
            }
        }
    }
    w.flush().map_err(|e| CliError::io("<stdout>", e))
}

fn metrics(mut cfg: ExperimentConfig, a: MetricsArgs, out: &mut dyn Write) -> Result<()> {
    merge_data(&mut cfg, &a.data)?;
    if let Some(t) = &a.benefit_table {
        cfg.benefit = benefit_table(t);
    }
    let ds = load_dataset(&cfg)?;
    let alpha = match a.alpha {
        Some(x) => x,
        None => single(&cfg.alphas, "alpha")?,
    };
    let pred = match (&a.predictions, &a.model) {
        (Some(p), _) => load_predictions(p)?,
        (None, Some(m)) => ModelFile::load(m)?.model()?.predict(&ds)?,
        (None, None) => return Err(CliError::Config("--predictions or --model is required".into())),
    };
    let spec = report_spec(ds.task(), alpha, cfg.benefit.spec(ds.task()));
    let report = full_report(&ds, &pred, ds.groups(), &spec)?;
    let row = MetricsRow::from(&report);
    emit(a.output.as_deref(), out, |w| write_metrics(w, &row))
}

fn mechanism(mut cfg: ExperimentConfig, a: MechanismArgs, out: &mut dyn Write) -> Result<()> {
    merge_data(&mut cfg, &a.data)?;
    merge_solver(&mut cfg, &a.solver);
    cfg.validate()?;
    let ds = load_dataset(&cfg)?;
    let mcfg = MechanismConfig {
        solver: cfg.solver_config(),
        literal_ge_lower_bound: a.literal_ge,
        ..MechanismConfig::default()
    };
    let distances = || pairwise_distances(&ds, DistanceMode::for_task(ds.task()));
    let mut representatives = None;
    let result = match a.kind {
        MechanismKind::DworkDelta => dwork_delta_mechanism(&ds, a.delta, &distances()?, &mcfg)?,
        MechanismKind::EpsilonNet => {
            representatives = Some(epsilon_net(&ds, a.epsilon)?.len());
            epsilon_net_mechanism(&ds, a.epsilon, &distances()?, &mcfg)?
        }
        MechanismKind::Speicher => {
            let grid = if a.mu.is_empty() { default_mu_grid(&ds, &mcfg.solver)? } else { a.mu.clone() };
            speicher_mechanism(&ds, a.tau, &grid, &mcfg)?
        }
    };
    let alpha = match a.alpha {
        Some(x) => x,
        None => single(&cfg.alphas, "alpha")?,
    };
    let pred = result.model.predict(&ds)?;
    let report = full_report(&ds, &pred, ds.groups(), &report_spec(ds.task(), alpha, cfg.benefit.spec(ds.task())))?;
    if let Some(path) = &a.out {
        let mut f = ModelFile::new(ds.task(), &result.model).with_status(result.status);
        f.columns = ds.column_names().to_vec();
        f.save(path)?;
    }
    let kind = match a.kind {
        MechanismKind::DworkDelta => "dwork_delta",
        MechanismKind::EpsilonNet => "epsilon_net",
        MechanismKind::Speicher => "speicher",
    };
    let value = json!({
        "mechanism": kind,
        "status": result.status.as_str(),
        "weights": result.model.weights(),
        "added_constraints": result.added_constraints,
        "representatives": representatives,
        "max_violation": result.max_violation,
        "avg_violation_initial": result.avg_violation_initial,
        "avg_violation_final": result.avg_violation_final,
        "selected_max_violation": result.selected_max_violation,
        "penalty": result.penalty,
        "mu": result.mu,
        "ge2": result.ge2,
        "flags": result.flags,
        "report": MetricsRow::from(&report),
    });
    writeln!(out, "{value}").map_err(|e| CliError::io("<stdout>", e))
}

/// Default path of the weights file written next to a generated dataset.
pub fn theta_path(data: &Path) -> PathBuf {
    data.with_extension("theta.toml")
}

fn gen(seed: u64, a: GenArgs) -> Result<()> {
    let (ds, theta) = match a.kind {
        GenKind::Realizable => gen_realizable(a.n, a.k, seed, a.theta_scale)?,
        GenKind::Regression => gen_synthetic(&SyntheticSpec::regression(a.n, a.k, seed))?,
        GenKind::Classification => gen_synthetic(&SyntheticSpec::classification(a.n, a.k, seed))?,
    };
    save_dataset(&a.out, &ds, "y")?;
    let mut f = ModelFile::new(ds.task(), &theta);
    f.status = Some("generated".into());
    f.columns = ds.column_names().to_vec();
    f.save(&a.theta.unwrap_or_else(|| theta_path(&a.out)))
}
