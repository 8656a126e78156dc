//! CSV datasets and prediction files.
//!
//! Datasets are UTF-8, comma separated, with a header row. Every column
//! other than the label, the optional group column and any dropped columns
//! becomes a feature; the homogeneous column is appended on load and never
//! written back. Numbers are written with Rust's shortest round-trip
//! formatting, so save followed by load is bit-exact.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use welfair_core::dataset::{GroupAssignment, GroupId, GroupRule};
use welfair_core::{Dataset, Task};

use crate::error::{CliError, Result};

/// Column of a saved dataset holding group membership (0 = G1, 1 = G2).
pub const GROUP_COLUMN: &str = "group";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsvSchema {
    pub label: String,
    #[serde(default = "default_task", with = "task_serde")]
    pub task: Task,
    /// 0/1 column: 0 is `G1`, 1 is `G2`. Not used as a feature.
    #[serde(default)]
    pub group: Option<String>,
    /// Threshold rule on a feature column; the column stays a feature.
    #[serde(default)]
    pub group_rule: Option<GroupRuleSpec>,
    /// Columns ignored entirely.
    #[serde(default)]
    pub drop: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupRuleSpec {
    pub column: String,
    pub threshold: f64,
}

fn default_task() -> Task {
    Task::Regression
}

pub(crate) mod task_serde {
    use serde::{Deserialize, Deserializer, Serializer};
    use welfair_core::Task;

    pub fn serialize<S: Serializer>(t: &Task, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(t.as_str())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Task, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl CsvSchema {
    pub fn new(label: impl Into<String>, task: Task) -> Self {
        CsvSchema {
            label: label.into(),
            task,
            group: None,
            group_rule: None,
            drop: Vec::new(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Loaded {
    pub dataset: Dataset,
    /// Rows skipped because a used cell was empty.
    pub rejected_rows: usize,
}

fn parse_cell(cell: &str, row: usize, column: &str) -> Result<f64> {
    cell.trim().parse::<f64>().map_err(|_| CliError::MalformedNumber {
        row,
        column: column.to_string(),
        value: cell.to_string(),
    })
}

fn find(headers: &[String], name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| CliError::MissingColumn(name.to_string()))
}

/// Parses a dataset from any reader; `origin` names it in errors.
pub fn read_csv<R: Read>(reader: R, schema: &CsvSchema, origin: &Path) -> Result<Loaded> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| CliError::csv(origin, e))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let label_col = find(&headers, &schema.label)?;
    let group_col = schema.group.as_deref().map(|g| find(&headers, g)).transpose()?;
    for d in &schema.drop {
        find(&headers, d)?;
    }
    let feature_cols: Vec<usize> = (0..headers.len())
        .filter(|&j| j != label_col && Some(j) != group_col && !schema.drop.contains(&headers[j]))
        .collect();
    let rule = match &schema.group_rule {
        Some(r) => Some((
            feature_cols
                .iter()
                .position(|&j| headers[j] == r.column)
                .ok_or_else(|| CliError::MissingColumn(r.column.clone()))?,
            GroupRule {
                column: r.column.clone(),
                threshold: r.threshold,
            },
        )),
        None => None,
    };

    let mut raw = Vec::new();
    let mut labels = Vec::new();
    let mut flags = Vec::new();
    let mut rejected = 0;
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::csv(origin, e))?;
        let row = i + 1;
        let used = feature_cols.iter().chain([&label_col]).chain(group_col.iter());
        if used.clone().any(|&j| rec.get(j).is_none_or(|c| c.trim().is_empty())) {
            rejected += 1;
            continue;
        }
        for &j in &feature_cols {
            raw.push(parse_cell(&rec[j], row, &headers[j])?);
        }
        labels.push(parse_cell(&rec[label_col], row, &headers[label_col])?);
        if let Some(g) = group_col {
            let v = parse_cell(&rec[g], row, &headers[g])?;
            if v != 0.0 && v != 1.0 {
                return Err(CliError::MalformedNumber {
                    row,
                    column: headers[g].clone(),
                    value: rec[g].to_string(),
                });
            }
            flags.push(v == 1.0);
        }
    }
    if labels.is_empty() {
        return Err(CliError::NoRows { rejected });
    }
    let names = feature_cols.iter().map(|&j| headers[j].clone()).collect();
    let dim = feature_cols.len();
    let mut dataset = Dataset::from_raw(&raw, dim, labels, schema.task, names)?;
    if let Some((pos, rule)) = rule {
        let column: Vec<f64> = dataset.rows().map(|r| r[pos]).collect();
        dataset = dataset.with_groups(rule.apply(&column))?;
    } else if group_col.is_some() {
        dataset = dataset.with_groups(GroupAssignment::from_flags(&flags))?;
    }
    Ok(Loaded { dataset, rejected_rows: rejected })
}

pub fn load_csv(path: &Path, schema: &CsvSchema) -> Result<Loaded> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    read_csv(file, schema, path)
}

/// Writes features (without the homogeneous column), the label column and,
/// if present, a `group` column.
pub fn write_dataset<W: Write>(writer: W, dataset: &Dataset, label: &str) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let k = dataset.k();
    let mut header: Vec<&str> = dataset.column_names()[..k - 1].iter().map(String::as_str).collect();
    header.push(label);
    if dataset.groups().is_some() {
        header.push(GROUP_COLUMN);
    }
    w.write_record(&header)?;
    for (i, row) in dataset.rows().enumerate() {
        let mut rec: Vec<String> = row[..k - 1].iter().map(|v| v.to_string()).collect();
        rec.push(dataset.labels()[i].to_string());
        if let Some(g) = dataset.groups() {
            rec.push(if g.membership()[i] == GroupId::G2 { "1" } else { "0" }.to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_dataset(path: &Path, dataset: &Dataset, label: &str) -> Result<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    write_dataset(file, dataset, label).map_err(|e| CliError::csv(path, e))
}

/// Reads one numeric column: the column named `prediction` if present,
/// otherwise the first column.
pub fn load_predictions(path: &Path) -> Result<Vec<f64>> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    read_column(file, "prediction", path)
}

/// Reads the named column, falling back to the first column.
pub fn read_column<R: Read>(reader: R, name: &str, origin: &Path) -> Result<Vec<f64>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| CliError::csv(origin, e))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let col = headers.iter().position(|h| h == name).unwrap_or(0);
    let column = headers.get(col).cloned().unwrap_or_default();
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::csv(origin, e))?;
        let cell = rec.get(col).ok_or_else(|| CliError::MissingColumn(column.clone()))?;
        out.push(parse_cell(cell, i + 1, &column)?);
    }
    Ok(out)
}

pub fn save_predictions(path: &Path, predictions: &[f64]) -> Result<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    let wrap = |e| CliError::csv(path, e);
    w.write_record(["prediction"]).map_err(wrap)?;
    for p in predictions {
        w.write_record([p.to_string()]).map_err(wrap)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}
