//! CSV readers and writers for datasets, distance matrices and labels.
//!
//! A dataset file holds one observation per row. A header row is detected
//! when any of its fields is not a number; a header column named `label`
//! (any case) is read as ground truth instead of a coordinate.

use std::fs;
use std::io::Write;
use std::path::Path;

use osil::{DataSet, DistanceMatrix, Partition};

use crate::error::{io_error, CliError, CliResult};

fn read_table(path: &Path) -> CliResult<(Option<Vec<String>>, Vec<Vec<String>>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| io_error(path, e))?;
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| io_error(path, e))?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        rows.push(rec.iter().map(str::to_owned).collect::<Vec<_>>());
    }
    let header = match rows.first() {
        Some(first) if first.iter().any(|f| f.parse::<f64>().is_err()) => Some(rows.remove(0)),
        _ => None,
    };
    Ok((header, rows))
}

fn parse_cell(path: &Path, row: usize, col: usize, s: &str) -> CliResult<f64> {
    s.parse::<f64>().map_err(|_| {
        CliError::Data(format!("{}: row {row}, column {col}: '{s}' is not a number", path.display()))
    })
}

/// Reads observations (and an optional `label` column) from a CSV file.
pub fn read_dataset(path: &Path) -> CliResult<DataSet> {
    let (header, rows) = read_table(path)?;
    let label_col = header
        .as_ref()
        .and_then(|h| h.iter().position(|c| c.eq_ignore_ascii_case("label")));
    let first_row = usize::from(header.is_some()) + 1;
    let mut coords = Vec::with_capacity(rows.len());
    let mut truth = label_col.map(|_| Vec::with_capacity(rows.len()));
    for (r, fields) in rows.iter().enumerate() {
        let mut row = Vec::with_capacity(fields.len());
        for (c, f) in fields.iter().enumerate() {
            if Some(c) == label_col {
                let v = f.parse::<i64>().map_err(|_| {
                    CliError::Data(format!(
                        "{}: row {}: label '{f}' is not an integer",
                        path.display(),
                        r + first_row
                    ))
                })?;
                truth.as_mut().expect("label column present").push(v);
            } else {
                row.push(parse_cell(path, r + first_row, c + 1, f)?);
            }
        }
        coords.push(row);
    }
    DataSet::new(coords, truth).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Reads a square dissimilarity matrix; a header row is skipped.
pub fn read_distances(path: &Path) -> CliResult<DistanceMatrix> {
    let (header, rows) = read_table(path)?;
    let first_row = usize::from(header.is_some()) + 1;
    let parsed = rows
        .iter()
        .enumerate()
        .map(|(r, fields)| {
            fields
                .iter()
                .enumerate()
                .map(|(c, f)| parse_cell(path, r + first_row, c + 1, f))
                .collect::<CliResult<Vec<f64>>>()
        })
        .collect::<CliResult<Vec<_>>>()?;
    DistanceMatrix::from_rows(parsed).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Writes coordinates followed by a `label` column when truth is present.
pub fn write_dataset(path: &Path, data: &DataSet) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_error(path, e))?;
    let mut header: Vec<String> = (1..=data.dim()).map(|j| format!("x{j}")).collect();
    if data.truth().is_some() {
        header.push("label".into());
    }
    w.write_record(&header).map_err(|e| io_error(path, e))?;
    for (i, row) in data.rows().enumerate() {
        let mut rec: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        if let Some(t) = data.truth() {
            rec.push((t[i] + 1).to_string());
        }
        w.write_record(&rec).map_err(|e| io_error(path, e))?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

/// Writes 1-based labels under a `label` header.
pub fn write_labels(path: &Path, part: &Partition) -> CliResult<()> {
    let mut out = String::from("label\n");
    for l in part.one_based() {
        out.push_str(&l.to_string());
        out.push('\n');
    }
    write_text(path, &out)
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    }
    let mut f = fs::File::create(path).map_err(|e| io_error(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| io_error(path, e))
}
