//! Plot-ready CSV emitters for harness results.

use std::fmt::Write as _;
use std::path::Path;

use super::grid::Method;
use super::matrix::{ComparisonMatrix, KStarRow};
use super::protocol::DatasetResults;
use super::sweep::SweepRow;
use crate::error::{Error, Result};
use crate::loss::IndividualLoss;
use crate::model::ModelFamily;

/// One (model family, individual loss) block of results.
#[derive(Debug, Clone)]
pub struct ResultBlock {
    pub model_family: ModelFamily,
    pub loss: IndividualLoss,
    pub datasets: Vec<DatasetResults>,
    pub matrix: ComparisonMatrix,
    pub kstar: Vec<KStarRow>,
}

fn write(path: &Path, body: String) -> Result<()> {
    std::fs::write(path, body).map_err(|e| Error::io(path, e))
}

fn cell(v: Option<f64>) -> String {
    v.map(|f| format!("{f:.4}")).unwrap_or_default()
}

pub fn render_matrix(blocks: &[ResultBlock]) -> String {
    let mut out = String::from("model_family,loss,measure,method");
    for m in Method::ALL {
        let _ = write!(out, ",{m}");
    }
    out.push('\n');
    for b in blocks {
        for (measure, table) in [
            ("significant", &b.matrix.significant),
            ("two_point", &b.matrix.two_point),
        ] {
            for row in Method::ALL {
                let Some(i) = b.matrix.methods.iter().position(|&m| m == row) else {
                    continue;
                };
                let _ = write!(out, "{},{},{measure},{row}", b.model_family, b.loss);
                for col in Method::ALL {
                    let v = b
                        .matrix
                        .methods
                        .iter()
                        .position(|&m| m == col)
                        .and_then(|j| table[i][j]);
                    let _ = write!(out, ",{}", cell(v));
                }
                out.push('\n');
            }
        }
    }
    out
}

pub fn render_per_dataset(blocks: &[ResultBlock]) -> String {
    let mut out = String::from(
        "model_family,loss,dataset,method,split,lambda,k,n_train,train_accuracy,valid_accuracy,test_accuracy,test_error_pct,diverged\n",
    );
    for b in blocks {
        for d in &b.datasets {
            for r in &d.methods {
                for o in &r.outcomes {
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{:e},{},{},{},{},{},{:.4},{}",
                        b.model_family,
                        b.loss,
                        d.dataset,
                        r.method,
                        o.split,
                        o.lambda,
                        o.k.map(|k| k.to_string()).unwrap_or_default(),
                        o.n_train,
                        o.train_accuracy,
                        o.valid_accuracy,
                        o.test_accuracy,
                        100.0 * (1.0 - o.test_accuracy),
                        o.diverged
                    );
                }
            }
        }
    }
    out
}

pub fn render_summary(blocks: &[ResultBlock]) -> String {
    let mut out = String::from(
        "model_family,loss,dataset,method,splits,mean_test_error_pct,sd_test_error_pct\n",
    );
    for b in blocks {
        for d in &b.datasets {
            for r in &d.methods {
                let errs: Vec<f64> = r
                    .test_accuracies()
                    .iter()
                    .map(|a| 100.0 * (1.0 - a))
                    .collect();
                let n = errs.len() as f64;
                let mean = errs.iter().sum::<f64>() / n;
                let sd = if errs.len() > 1 {
                    (errs.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
                } else {
                    0.0
                };
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{mean:.4},{sd:.4}",
                    b.model_family,
                    b.loss,
                    d.dataset,
                    r.method,
                    errs.len()
                );
            }
        }
    }
    out
}

pub fn render_kstar(blocks: &[ResultBlock]) -> String {
    let mut out = String::from("model_family,loss,dataset,k_star_fraction,accuracy_gain\n");
    for b in blocks {
        for r in &b.kstar {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                b.model_family, b.loss, r.dataset, r.k_star_fraction, r.accuracy_gain
            );
        }
    }
    out
}

pub fn render_sweep(rows: &[SweepRow]) -> String {
    let mut out = String::from(
        "corruption,level,method,mean_test_accuracy,mean_train_accuracy,majority_baseline,splits\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.corruption,
            r.level,
            r.method,
            r.mean_test_accuracy,
            r.mean_train_accuracy,
            r.majority_baseline,
            r.splits
        );
    }
    out
}

pub const SCHEMA: &str = "\
matrix.csv
  One block per (model_family, loss) and measure. Row `method` = i, column = j;
  each cell is the fraction of datasets on which method j beat method i.
  measure=significant: two-sided paired t-test over shared splits, p <= 0.05
    and positive mean accuracy difference.
  measure=two_point: mean test accuracy gain of at least 0.02, regardless of p.
  Diagonal cells are empty.

per_dataset.csv
  One row per (model_family, loss, dataset, method, split).
  lambda, k: hyperparameters selected on validation accuracy (k empty for average).
  n_train: training rows after any corruption.
  *_accuracy: fraction correct in [0, 1]; test_error_pct = 100 * (1 - test_accuracy).
  diverged: grid points skipped because training produced non-finite values.

summary.csv
  Mean and sample standard deviation of the test error percentage over splits,
  per (model_family, loss, dataset, method).

kstar.csv
  k_star_fraction: mean over splits of selected k*/n_train for close_decay.
  accuracy_gain: mean test accuracy of close_decay minus that of average.

sweep_<corruption>.csv
  level: corruption level (outliers/ambiguous: appended fraction of rows;
    imbalance: target fraction of negatives; 0 = uncorrupted).
  mean_test_accuracy, mean_train_accuracy: means over `splits` splits.
  majority_baseline: mean over splits of the majority-class fraction of the
    test labels.
";

/// Writes `matrix.csv`, `per_dataset.csv`, `summary.csv`, `kstar.csv` and
/// `schema.txt` into `dir`.
pub fn write_bench_outputs(dir: &Path, blocks: &[ResultBlock]) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write(&dir.join("matrix.csv"), render_matrix(blocks))?;
    write(&dir.join("per_dataset.csv"), render_per_dataset(blocks))?;
    write(&dir.join("summary.csv"), render_summary(blocks))?;
    write(&dir.join("kstar.csv"), render_kstar(blocks))?;
    write(&dir.join("schema.txt"), SCHEMA.to_string())
}

/// Writes `sweep_<corruption>.csv` and `schema.txt` into `dir`.
pub fn write_sweep_outputs(dir: &Path, rows: &[SweepRow]) -> Result<std::path::PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let name = rows
        .first()
        .map(|r| format!("sweep_{}.csv", r.corruption))
        .unwrap_or_else(|| "sweep.csv".into());
    let path = dir.join(name);
    write(&path, render_sweep(rows))?;
    write(&dir.join("schema.txt"), SCHEMA.to_string())?;
    Ok(path)
}
