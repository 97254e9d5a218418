//! Aggregate tables over run records: mean ASW/OASW, mean ARI, and how often
//! each `k` was chosen.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::campaign::{Method, Regime, RunRecord};
use crate::error::{io_error, CliError, CliResult};
use crate::SCHEMA_VERSION;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Table {
    Asw,
    Ari,
    Kfreq,
}

impl FromStr for Table {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "asw" => Ok(Table::Asw),
            "ari" => Ok(Table::Ari),
            "kfreq" => Ok(Table::Kfreq),
            other => Err(CliError::Usage(format!("unknown table '{other}' (asw, ari or kfreq)"))),
        }
    }
}

/// Which of the two rows per model a value belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Row {
    /// The clusterer on its own.
    Standalone,
    /// OSil from that clusterer, or PAMSIL.
    Optimized,
}

/// Mean and standard error of one (model, row, method) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanCell {
    pub schema_version: u32,
    pub model: u8,
    pub row: Row,
    pub method: String,
    pub mean: f64,
    pub se: f64,
    pub n: usize,
    /// Largest mean among the model's rows, ties included.
    pub best: bool,
}

/// Number of estimate-regime runs of a method that chose `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KCount {
    pub schema_version: u32,
    pub model: u8,
    pub method: String,
    pub k_true: usize,
    pub k: usize,
    pub count: usize,
    pub correct: bool,
}

/// Mean and standard error (`sd / sqrt(n)`, zero for one value).
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn column_order(records: &[RunRecord]) -> Vec<String> {
    let mut cols: Vec<String> = Vec::new();
    for r in records {
        if let Ok(m) = r.method.parse::<Method>() {
            let c = m.column();
            if !cols.contains(&c) {
                cols.push(c);
            }
        }
    }
    cols
}

/// Table of means over successful fixed-regime records.
pub fn mean_table(records: &[RunRecord], table: Table) -> Vec<MeanCell> {
    let order = column_order(records);
    let mut groups: BTreeMap<(u8, Row, usize), (String, Vec<f64>)> = BTreeMap::new();
    for r in records.iter().filter(|r| r.regime == Regime::Fixed && r.status == "ok") {
        let Ok(method) = r.method.parse::<Method>() else { continue };
        let (row, value) = match (table, &method) {
            (Table::Asw, Method::Init(_)) => (Row::Standalone, r.asw),
            (Table::Asw, _) => (Row::Optimized, r.oasw),
            (Table::Ari, Method::Init(_)) => (Row::Standalone, r.ari),
            (Table::Ari, _) => (Row::Optimized, r.ari),
            (Table::Kfreq, _) => unreachable!("frequency tables are built by kfreq_table"),
        };
        let Some(value) = value else { continue };
        let col = method.column();
        let idx = order.iter().position(|c| *c == col).expect("column seen");
        groups.entry((r.model, row, idx)).or_insert_with(|| (col, Vec::new())).1.push(value);
    }
    let mut cells: Vec<MeanCell> = groups
        .into_iter()
        .map(|((model, row, _), (method, values))| {
            let (mean, se) = mean_se(&values);
            MeanCell { schema_version: SCHEMA_VERSION, model, row, method, mean, se, n: values.len(), best: false }
        })
        .collect();
    let mut best: BTreeMap<u8, f64> = BTreeMap::new();
    for c in &cells {
        let b = best.entry(c.model).or_insert(f64::NEG_INFINITY);
        *b = b.max(c.mean);
    }
    for c in &mut cells {
        c.best = c.mean == best[&c.model];
    }
    cells
}

/// Histogram of chosen `k` per (model, method) over estimate-regime records.
pub fn kfreq_table(records: &[RunRecord]) -> Vec<KCount> {
    let order: Vec<String> = {
        let mut v: Vec<String> = Vec::new();
        for r in records {
            if !v.contains(&r.method) {
                v.push(r.method.clone());
            }
        }
        v
    };
    let mut counts: BTreeMap<(u8, usize, usize), (String, usize, usize)> = BTreeMap::new();
    for r in records.iter().filter(|r| r.regime == Regime::Estimate && r.status == "ok") {
        let Some(k) = r.k else { continue };
        let idx = order.iter().position(|m| *m == r.method).expect("method seen");
        counts.entry((r.model, idx, k)).or_insert_with(|| (r.method.clone(), r.k_true, 0)).2 += 1;
    }
    counts
        .into_iter()
        .map(|((model, _, k), (method, k_true, count))| KCount {
            schema_version: SCHEMA_VERSION,
            model,
            method,
            k_true,
            k,
            count,
            correct: k == k_true,
        })
        .collect()
}

fn to_csv<T: Serialize>(rows: &[T], header: &[&str]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if rows.is_empty() {
        w.write_record(header).map_err(|e| CliError::Data(e.to_string()))?;
    }
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Data(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Data(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub const MEAN_HEADER: [&str; 8] = ["schema_version", "model", "row", "method", "mean", "se", "n", "best"];
pub const KFREQ_HEADER: [&str; 7] = ["schema_version", "model", "method", "k_true", "k", "count", "correct"];
pub const RECORD_HEADER: [&str; 14] = [
    "schema_version",
    "model",
    "replicate",
    "regime",
    "method",
    "k_true",
    "k",
    "asw",
    "oasw",
    "ari",
    "score",
    "iterations",
    "status",
    "error",
];

pub fn records_csv(records: &[RunRecord]) -> CliResult<String> {
    to_csv(records, &RECORD_HEADER)
}

pub fn table_csv(records: &[RunRecord], table: Table) -> CliResult<String> {
    match table {
        Table::Kfreq => to_csv(&kfreq_table(records), &KFREQ_HEADER),
        t => to_csv(&mean_table(records, t), &MEAN_HEADER),
    }
}

/// Reads records written by a campaign, rejecting other schemas.
pub fn read_records(path: &Path) -> CliResult<Vec<RunRecord>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| io_error(path, e))?;
    let header = reader.headers().map_err(|e| io_error(path, e))?.clone();
    if header.iter().ne(RECORD_HEADER.iter().copied()) {
        return Err(CliError::Data(format!(
            "{}: schema mismatch: expected columns {}",
            path.display(),
            RECORD_HEADER.join(",")
        )));
    }
    let mut out = Vec::new();
    for (i, rec) in reader.deserialize::<RunRecord>().enumerate() {
        let rec = rec.map_err(|e| CliError::Data(format!("{}: record {}: {e}", path.display(), i + 1)))?;
        if rec.schema_version != SCHEMA_VERSION {
            return Err(CliError::Data(format!(
                "{}: schema mismatch: version {} (expected {SCHEMA_VERSION})",
                path.display(),
                rec.schema_version
            )));
        }
        out.push(rec);
    }
    Ok(out)
}

/// Aligned text rendering; row maxima are marked with `*`.
pub fn render(records: &[RunRecord], table: Table) -> String {
    let mut out = String::new();
    match table {
        Table::Kfreq => {
            let rows = kfreq_table(records);
            let mut totals: BTreeMap<(u8, String), (usize, usize, usize)> = BTreeMap::new();
            for r in &rows {
                let e = totals.entry((r.model, r.method.clone())).or_insert((r.k_true, 0, 0));
                e.2 += r.count;
                if r.correct {
                    e.1 += r.count;
                }
            }
            let _ = writeln!(out, "{:<6} {:<16} {:>6} {:>8}", "model", "method", "k_true", "correct");
            for ((model, method), (k_true, correct, total)) in totals {
                let _ = writeln!(out, "{model:<6} {method:<16} {k_true:>6} {:>8}", format!("{correct}/{total}"));
            }
        }
        t => {
            let cells = mean_table(records, t);
            let cols = column_order(records);
            let width = cols.iter().map(String::len).max().unwrap_or(0).max(17);
            let _ = write!(out, "{:<6} {:<10}", "model", "row");
            for c in &cols {
                let _ = write!(out, " {c:>width$}");
            }
            out.push('\n');
            let mut keys: Vec<(u8, Row)> = cells.iter().map(|c| (c.model, c.row)).collect();
            keys.dedup();
            for (model, row) in keys {
                let label = match row {
                    Row::Standalone => "standalone",
                    Row::Optimized => "optimized",
                };
                let _ = write!(out, "{model:<6} {label:<10}");
                for c in &cols {
                    let cell = cells.iter().find(|x| x.model == model && x.row == row && x.method == *c);
                    let text = cell.map_or("-".to_string(), |x| {
                        format!("{:.4} ({:.4}){}", x.mean, x.se, if x.best { "*" } else { " " })
                    });
                    let _ = write!(out, " {text:>width$}");
                }
                out.push('\n');
            }
        }
    }
    out
}
