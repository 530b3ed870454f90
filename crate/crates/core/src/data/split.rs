use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::LabeledDataset;
use crate::error::{Error, Result};

/// Train/validation/test fractions. Test takes the remainder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_frac: f64,
    pub valid_frac: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(seed: u64) -> Self {
        SplitSpec {
            train_frac: 0.5,
            valid_frac: 0.25,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub valid: Vec<usize>,
    pub test: Vec<usize>,
}

/// Shuffles `0..n` with the spec's seed and cuts it into three disjoint
/// parts of sizes `⌊0.5n⌋`, `⌊0.25n⌋` and the remainder.
pub fn sample_split(n: usize, spec: &SplitSpec) -> Result<Split> {
    if n < 4 {
        return Err(Error::invalid(format!(
            "need at least 4 rows to split, got {n}"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    idx.shuffle(&mut rng);
    let n_train = (spec.train_frac * n as f64).floor() as usize;
    let n_valid = (spec.valid_frac * n as f64).floor() as usize;
    let test = idx.split_off(n_train + n_valid);
    let valid = idx.split_off(n_train);
    Ok(Split {
        train: idx,
        valid,
        test,
    })
}

/// Per-feature z-scoring fitted on a training view only.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    /// Population standard deviation; zero marks a constant feature.
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(train: &LabeledDataset) -> Self {
        let d = train.dim();
        let n = train.len() as f64;
        let mut mean = vec![0.0; d];
        for row in train.rows() {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for row in train.rows() {
            for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var
            .into_iter()
            .zip(&mean)
            .map(|(s, m)| {
                let sd = (s / n).sqrt();
                // rounding noise on a constant column
                if sd <= 1e-12 * m.abs().max(1.0) {
                    0.0
                } else {
                    sd
                }
            })
            .collect();
        Standardizer { mean, std }
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| if *s == 0.0 { 0.0 } else { (v - m) / s })
            .collect()
    }

    pub fn apply(&self, data: &LabeledDataset) -> Result<LabeledDataset> {
        if data.dim() != self.mean.len() {
            return Err(Error::DimensionMismatch {
                expected: self.mean.len(),
                found: data.dim(),
            });
        }
        let features = data.rows().flat_map(|r| self.transform_row(r)).collect();
        data.with_features(features)
    }
}
