//! Datasets: the labeled container, file I/O, generators, corruption
//! transforms, standardization and split sampling.

mod corrupt;
mod generate;
mod scan;
mod split;
mod table;

pub use corrupt::{add_ambiguous, amplify_imbalance, inject_outliers, outlier_point};
pub use generate::{gen_example1, gen_example2, gen_figure1, Scenario};
pub use scan::{threshold_scan, ThresholdScan};
pub use split::{sample_split, Split, SplitSpec, Standardizer};
pub use table::{load_table, write_table, DEFAULT_LABEL_COLUMN};

use crate::error::{DatasetError, Error, Result};

/// Row-major feature matrix with `±1` labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub name: String,
    dim: usize,
    features: Vec<f64>,
    labels: Vec<f64>,
}

impl LabeledDataset {
    /// Validates the invariants: at least one row, finite features, labels in {−1, +1}.
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        features: Vec<f64>,
        labels: Vec<f64>,
    ) -> Result<Self> {
        if labels.is_empty() {
            return Err(DatasetError::Empty.into());
        }
        if features.len() != dim * labels.len() {
            return Err(Error::DimensionMismatch {
                expected: dim * labels.len(),
                found: features.len(),
            });
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(DatasetError::NonFinite {
                row: pos / dim.max(1),
                column: pos % dim.max(1),
            }
            .into());
        }
        if let Some(&bad) = labels.iter().find(|&&y| y != 1.0 && y != -1.0) {
            return Err(DatasetError::BadLabel(bad).into());
        }
        Ok(LabeledDataset {
            name: name.into(),
            dim,
            features,
            labels,
        })
    }

    pub fn from_rows(name: impl Into<String>, rows: &[Vec<f64>], labels: Vec<f64>) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.len(),
            });
        }
        Self::new(name, dim, rows.concat(), labels)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.features.chunks(self.dim.max(1)).take(self.len())
    }

    pub fn label(&self, i: usize) -> f64 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    /// Single feature column.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn count_positive(&self) -> usize {
        self.labels.iter().filter(|&&y| y > 0.0).count()
    }

    pub fn count_negative(&self) -> usize {
        self.len() - self.count_positive()
    }

    /// Accuracy of always predicting the more frequent label.
    pub fn majority_fraction(&self) -> f64 {
        let p = self.count_positive();
        p.max(self.len() - p) as f64 / self.len() as f64
    }

    pub fn indices_with_label(&self, y: f64) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.labels[i] == y).collect()
    }

    /// Rows at `idx`, in that order.
    pub fn subset(&self, idx: &[usize]) -> Result<Self> {
        let mut features = Vec::with_capacity(idx.len() * self.dim);
        let mut labels = Vec::with_capacity(idx.len());
        for &i in idx {
            if i >= self.len() {
                return Err(Error::invalid(format!("row {i} out of range")));
            }
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Self::new(self.name.clone(), self.dim, features, labels)
    }

    /// Copy with extra rows appended.
    pub fn with_appended(&self, extra_features: &[f64], extra_labels: &[f64]) -> Result<Self> {
        let mut features = self.features.clone();
        features.extend_from_slice(extra_features);
        let mut labels = self.labels.clone();
        labels.extend_from_slice(extra_labels);
        Self::new(self.name.clone(), self.dim, features, labels)
    }

    pub fn with_features(&self, features: Vec<f64>) -> Result<Self> {
        Self::new(self.name.clone(), self.dim, features, self.labels.clone())
    }
}
