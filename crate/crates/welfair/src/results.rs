//! Results tables: one CSV row per `(alpha, tau, fold)` cell.
//!
//! The header is fixed; `schema_version` is bumped whenever a column is
//! added, removed or changes meaning. Metric cells are empty when a cell
//! failed or a metric is undefined (for example group metrics without
//! groups, or accuracy for regression).

use std::cmp::Ordering;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use welfair_core::fairmetrics::MetricsReport;
use welfair_core::SolveResult;

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Column order of every results file.
pub const HEADER: [&str; 20] = [
    "schema_version",
    "alpha",
    "tau",
    "fold",
    "status",
    "loss",
    "accuracy",
    "welfare",
    "atkinson",
    "ge2",
    "dwork_violation",
    "demographic_parity",
    "fpr_diff",
    "fnr_diff",
    "mean_diff",
    "pos_residual_diff",
    "neg_residual_diff",
    "lambda",
    "intercept",
    "mean_benefit",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub schema_version: u32,
    pub alpha: f64,
    pub tau: f64,
    pub fold: usize,
    /// `optimal`, `max_iter`, `infeasible`, `non_convergence` or `domain_collapse`.
    pub status: String,
    pub loss: Option<f64>,
    pub accuracy: Option<f64>,
    pub welfare: Option<f64>,
    pub atkinson: Option<f64>,
    pub ge2: Option<f64>,
    pub dwork_violation: Option<f64>,
    pub demographic_parity: Option<f64>,
    pub fpr_diff: Option<f64>,
    pub fnr_diff: Option<f64>,
    pub mean_diff: Option<f64>,
    pub pos_residual_diff: Option<f64>,
    pub neg_residual_diff: Option<f64>,
    pub lambda: Option<f64>,
    pub intercept: Option<f64>,
    pub mean_benefit: Option<f64>,
}

impl ResultRow {
    /// A row for a cell that produced no model.
    pub fn failed(alpha: f64, tau: f64, fold: usize, status: &str) -> Self {
        ResultRow {
            schema_version: SCHEMA_VERSION,
            alpha,
            tau,
            fold,
            status: status.to_string(),
            loss: None,
            accuracy: None,
            welfare: None,
            atkinson: None,
            ge2: None,
            dwork_violation: None,
            demographic_parity: None,
            fpr_diff: None,
            fnr_diff: None,
            mean_diff: None,
            pos_residual_diff: None,
            neg_residual_diff: None,
            lambda: None,
            intercept: None,
            mean_benefit: None,
        }
    }

    pub fn from_solve(alpha: f64, tau: f64, fold: usize, solve: &SolveResult, report: &MetricsReport) -> Self {
        ResultRow {
            lambda: Some(solve.lambda),
            intercept: Some(solve.model.intercept()),
            ..ResultRow::from_report(alpha, tau, fold, solve.status.as_str(), report)
        }
    }

    /// Metric columns from a report; `lambda` and `intercept` stay empty.
    pub fn from_report(alpha: f64, tau: f64, fold: usize, status: &str, r: &MetricsReport) -> Self {
        ResultRow {
            loss: Some(r.loss),
            accuracy: r.accuracy,
            welfare: Some(r.welfare),
            atkinson: Some(r.atkinson),
            ge2: Some(r.ge),
            dwork_violation: Some(r.dwork_violation),
            demographic_parity: r.demographic_parity,
            fpr_diff: r.fpr_diff,
            fnr_diff: r.fnr_diff,
            mean_diff: r.mean_diff,
            pos_residual_diff: r.pos_residual_diff,
            neg_residual_diff: r.neg_residual_diff,
            mean_benefit: Some(r.mean_benefit),
            ..ResultRow::failed(alpha, tau, fold, status)
        }
    }

    pub fn succeeded(&self) -> bool {
        self.loss.is_some()
    }

    /// Metric columns by name, in header order.
    pub fn metrics(&self) -> [(&'static str, Option<f64>); 13] {
        [
            ("loss", self.loss),
            ("accuracy", self.accuracy),
            ("welfare", self.welfare),
            ("atkinson", self.atkinson),
            ("ge2", self.ge2),
            ("dwork_violation", self.dwork_violation),
            ("demographic_parity", self.demographic_parity),
            ("fpr_diff", self.fpr_diff),
            ("fnr_diff", self.fnr_diff),
            ("mean_diff", self.mean_diff),
            ("pos_residual_diff", self.pos_residual_diff),
            ("neg_residual_diff", self.neg_residual_diff),
            ("mean_benefit", self.mean_benefit),
        ]
    }
}

/// One metrics report as a table row; `flags` is `;`-separated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub n: usize,
    pub loss: f64,
    pub accuracy: Option<f64>,
    pub welfare: f64,
    pub atkinson: f64,
    pub ge2: f64,
    pub dwork_violation: f64,
    pub demographic_parity: Option<f64>,
    pub fpr_diff: Option<f64>,
    pub fnr_diff: Option<f64>,
    pub mean_diff: Option<f64>,
    pub pos_residual_diff: Option<f64>,
    pub neg_residual_diff: Option<f64>,
    pub mean_benefit: f64,
    pub flags: String,
}

impl From<&MetricsReport> for MetricsRow {
    fn from(r: &MetricsReport) -> Self {
        MetricsRow {
            n: r.n,
            loss: r.loss,
            accuracy: r.accuracy,
            welfare: r.welfare,
            atkinson: r.atkinson,
            ge2: r.ge,
            dwork_violation: r.dwork_violation,
            demographic_parity: r.demographic_parity,
            fpr_diff: r.fpr_diff,
            fnr_diff: r.fnr_diff,
            mean_diff: r.mean_diff,
            pos_residual_diff: r.pos_residual_diff,
            neg_residual_diff: r.neg_residual_diff,
            mean_benefit: r.mean_benefit,
            flags: r.flags.join(";"),
        }
    }
}

impl MetricsRow {
    /// Metric columns shared with [`ResultRow::metrics`].
    pub fn metrics(&self) -> [(&'static str, Option<f64>); 13] {
        [
            ("loss", Some(self.loss)),
            ("accuracy", self.accuracy),
            ("welfare", Some(self.welfare)),
            ("atkinson", Some(self.atkinson)),
            ("ge2", Some(self.ge2)),
            ("dwork_violation", Some(self.dwork_violation)),
            ("demographic_parity", self.demographic_parity),
            ("fpr_diff", self.fpr_diff),
            ("fnr_diff", self.fnr_diff),
            ("mean_diff", self.mean_diff),
            ("pos_residual_diff", self.pos_residual_diff),
            ("neg_residual_diff", self.neg_residual_diff),
            ("mean_benefit", Some(self.mean_benefit)),
        ]
    }
}

pub fn write_metrics<W: Write>(writer: W, row: &MetricsRow) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.serialize(row)?;
    w.flush()?;
    Ok(())
}

pub fn read_metrics<R: Read>(reader: R, origin: &Path) -> Result<MetricsRow> {
    csv::Reader::from_reader(reader)
        .deserialize()
        .next()
        .ok_or_else(|| CliError::Config(format!("{}: empty metrics file", origin.display())))?
        .map_err(|e| CliError::csv(origin, e))
}

pub fn cell_order(a: &ResultRow, b: &ResultRow) -> Ordering {
    a.alpha
        .total_cmp(&b.alpha)
        .then(a.tau.total_cmp(&b.tau))
        .then(a.fold.cmp(&b.fold))
}

/// Sorts by `(alpha, tau, fold)` and writes header plus rows.
pub fn write_results<W: Write>(writer: W, rows: &mut [ResultRow]) -> csv::Result<()> {
    rows.sort_by(cell_order);
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(HEADER)?;
    for r in rows.iter() {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_results<R: Read>(reader: R, origin: &Path) -> Result<Vec<ResultRow>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| CliError::csv(origin, e))?
        .iter()
        .map(str::to_string)
        .collect();
    if header != HEADER {
        return Err(CliError::Config(format!(
            "{}: not a version {SCHEMA_VERSION} results file",
            origin.display()
        )));
    }
    rdr.deserialize()
        .collect::<csv::Result<Vec<ResultRow>>>()
        .map_err(|e| CliError::csv(origin, e))
}

pub fn save_results(path: &Path, rows: &mut [ResultRow]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    write_results(file, rows).map_err(|e| CliError::csv(path, e))
}

pub fn load_results(path: &Path) -> Result<Vec<ResultRow>> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    read_results(file, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorted_round_trip_with_empty_cells() {
        let mut ok = ResultRow::failed(0.5, 2.0, 0, "optimal");
        ok.loss = Some(0.1 + 0.2);
        ok.welfare = Some(1.0 / 3.0);
        ok.lambda = Some(0.0);
        let mut rows = vec![
            ok.clone(),
            ResultRow::failed(0.5, 1.0, 1, "infeasible"),
            ResultRow::failed(0.3, 4.0, 0, "infeasible"),
            ResultRow::failed(0.5, 1.0, 0, "infeasible"),
        ];
        let mut buf = Vec::new();
        write_results(&mut buf, &mut rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("schema_version,alpha,tau,fold,status,loss,"));
        assert!(text.contains("1,0.3,4.0,0,infeasible,,,"));
        let back = read_results(buf.as_slice(), Path::new("r.csv")).unwrap();
        assert_eq!(back, rows);
        let keys: Vec<_> = back.iter().map(|r| (r.alpha, r.tau, r.fold)).collect();
        assert_eq!(keys, [(0.3, 4.0, 0), (0.5, 1.0, 0), (0.5, 1.0, 1), (0.5, 2.0, 0)]);
        assert_eq!(back[3].loss.unwrap().to_bits(), (0.1f64 + 0.2).to_bits());
        assert!(!back[0].succeeded() && back[3].succeeded());
    }

    #[test]
    fn rejects_foreign_header() {
        assert!(read_results("a,b\n1,2\n".as_bytes(), Path::new("x.csv")).is_err());
    }
}
