use std::collections::{BTreeSet, HashSet};
use std::path::Path;

use super::LabeledDataset;
use crate::error::{DatasetError, Error, Result};

pub const DEFAULT_LABEL_COLUMN: &str = "target";

fn sniff_delimiter(header: &str) -> u8 {
    if header.contains('\t') {
        b'\t'
    } else {
        b','
    }
}

/// Orders raw label values: numerically when both parse, otherwise lexicographically.
fn label_order(a: &str, b: &str) -> std::cmp::Ordering {
    match (a.parse::<f64>(), b.parse::<f64>()) {
        (Ok(x), Ok(y)) => x.total_cmp(&y),
        _ => a.cmp(b),
    }
}

/// Reads a comma- or tab-delimited table with a header row.
///
/// Every column except `label_column` becomes a feature, in header order.
/// The label column must hold exactly two distinct values; the larger maps
/// to `+1`.
pub fn load_table(path: impl AsRef<Path>, label_column: &str) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_table(&text, label_column, name)
}

pub(crate) fn parse_table(text: &str, label_column: &str, name: String) -> Result<LabeledDataset> {
    let first = text
        .lines()
        .find(|l| !l.trim().is_empty())
        .ok_or(DatasetError::Empty)?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(sniff_delimiter(first))
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());

    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::invalid(format!("unreadable header: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut seen = HashSet::new();
    for h in &headers {
        if !seen.insert(h.as_str()) {
            return Err(DatasetError::DuplicateColumn(h.clone()).into());
        }
    }
    let label_idx = headers
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| DatasetError::MissingLabelColumn(label_column.to_string()))?;
    let dim = headers.len() - 1;

    let mut features = Vec::new();
    let mut raw_labels = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::invalid(format!("row {row}: {e}")))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        if record.len() != headers.len() {
            return Err(DatasetError::RaggedRow {
                row,
                expected: headers.len(),
                found: record.len(),
            }
            .into());
        }
        for (j, field) in record.iter().enumerate() {
            if j == label_idx {
                raw_labels.push(field.to_string());
                continue;
            }
            let value: f64 = field.parse().map_err(|_| DatasetError::NonNumeric {
                row,
                column: headers[j].clone(),
                value: field.to_string(),
            })?;
            features.push(value);
        }
    }
    if raw_labels.is_empty() {
        return Err(DatasetError::Empty.into());
    }

    let distinct: BTreeSet<&str> = raw_labels.iter().map(String::as_str).collect();
    if distinct.len() != 2 {
        return Err(DatasetError::NotBinary(distinct.len()).into());
    }
    let mut values: Vec<&str> = distinct.into_iter().collect();
    values.sort_by(|a, b| label_order(a, b));
    let positive = values[1];
    let labels = raw_labels
        .iter()
        .map(|l| if l == positive { 1.0 } else { -1.0 })
        .collect();
    LabeledDataset::new(name, dim, features, labels)
}

/// Writes `x0,…,x{d-1},target` with labels as `-1`/`1`. Output is a pure
/// function of the dataset, so equal datasets produce identical bytes.
pub fn write_table(data: &LabeledDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, render_table(data)).map_err(|e| Error::io(path, e))
}

pub(crate) fn render_table(data: &LabeledDataset) -> String {
    let mut out = String::new();
    for j in 0..data.dim() {
        out.push_str(&format!("x{j},"));
    }
    out.push_str(DEFAULT_LABEL_COLUMN);
    out.push('\n');
    for (row, &y) in data.rows().zip(data.labels()) {
        for v in row {
            out.push_str(&format!("{v},"));
        }
        out.push_str(if y > 0.0 { "1" } else { "-1" });
        out.push('\n');
    }
    out
}
