//! Accuracy-versus-corruption curves.

use std::fmt;
use std::str::FromStr;

use super::grid::Method;
use super::protocol::{mean, prepare_split, run_protocol_with, Partition, ProtocolConfig};
use crate::data::{add_ambiguous, amplify_imbalance, inject_outliers, LabeledDataset};
use crate::error::{Error, Result};

/// Split count used by sweeps unless overridden.
pub const SWEEP_SPLITS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Corruption {
    /// Level = fraction of appended `10·x₂ − 9·x₁` outliers. Training part only.
    Outliers,
    /// Level = target fraction of negatives. Applied to every partition.
    Imbalance,
    /// Level = fraction of appended contradictory copies. Applied to every partition.
    Ambiguous,
}

impl Corruption {
    pub fn name(self) -> &'static str {
        match self {
            Corruption::Outliers => "outliers",
            Corruption::Imbalance => "imbalance",
            Corruption::Ambiguous => "ambiguous",
        }
    }

    fn touches(self, part: Partition) -> bool {
        match self {
            Corruption::Outliers => part == Partition::Train,
            Corruption::Imbalance | Corruption::Ambiguous => true,
        }
    }

    /// Applies this corruption at `level`; a level of 0 is the identity.
    pub fn apply(self, data: &LabeledDataset, level: f64, seed: u64) -> Result<LabeledDataset> {
        if level == 0.0 {
            return Ok(data.clone());
        }
        match self {
            Corruption::Outliers => inject_outliers(data, level, seed),
            Corruption::Imbalance => amplify_imbalance(data, level, seed),
            Corruption::Ambiguous => add_ambiguous(data, level, seed),
        }
    }

    fn check_level(self, level: f64) -> Result<()> {
        let ok = level == 0.0
            || match self {
                Corruption::Imbalance => level > 0.5 && level < 1.0,
                _ => level > 0.0 && level < 1.0,
            };
        if !ok {
            return Err(Error::invalid(format!(
                "level {level} is invalid for {}",
                self.name()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Corruption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Corruption {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "outliers" | "outlier" => Ok(Corruption::Outliers),
            "imbalance" => Ok(Corruption::Imbalance),
            "ambiguous" => Ok(Corruption::Ambiguous),
            other => Err(Error::invalid(format!("unknown corruption `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub corruption: Corruption,
    pub level: f64,
    pub method: Method,
    pub mean_test_accuracy: f64,
    pub mean_train_accuracy: f64,
    /// Mean over splits of the majority-class accuracy on the test labels.
    pub majority_baseline: f64,
    pub splits: usize,
}

fn partition_seed(seed: u64, part: Partition) -> u64 {
    let salt = match part {
        Partition::Train => 0x7472_6169_6e00_0000,
        Partition::Valid => 0x7661_6c69_6400_0000,
        Partition::Test => 0x7465_7374_0000_0000,
    };
    seed ^ salt
}

/// Runs the protocol once per level with the corruption applied inside
/// every split, and reports per-method mean accuracies.
pub fn simulate_sweep(
    base: &LabeledDataset,
    corruption: Corruption,
    levels: &[f64],
    config: &ProtocolConfig,
) -> Result<Vec<SweepRow>> {
    if base.count_positive() == 0 || base.count_negative() == 0 {
        return Err(crate::error::DatasetError::SingleClass.into());
    }
    for &level in levels {
        corruption.check_level(level)?;
    }
    let mut rows = Vec::new();
    for &level in levels {
        let corrupt = move |part: Partition, d: &LabeledDataset, seed: u64| {
            if corruption.touches(part) {
                corruption.apply(d, level, partition_seed(seed, part))
            } else {
                Ok(d.clone())
            }
        };
        let results = run_protocol_with(base, config, &corrupt, None)?;
        let baseline = mean(
            (0..config.splits)
                .map(|s| {
                    prepare_split(base, config, s, &corrupt).map(|p| p.test.majority_fraction())
                })
                .collect::<Result<Vec<_>>>()?
                .into_iter(),
        );
        for r in &results.methods {
            rows.push(SweepRow {
                corruption,
                level,
                method: r.method,
                mean_test_accuracy: r.mean_test_accuracy(),
                mean_train_accuracy: r.mean_train_accuracy(),
                majority_baseline: baseline,
                splits: config.splits,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_validation() {
        assert!(Corruption::Imbalance.check_level(0.4).is_err());
        assert!(Corruption::Imbalance.check_level(0.0).is_ok());
        assert!(Corruption::Outliers.check_level(1.0).is_err());
        assert!("noise".parse::<Corruption>().is_err());
    }

    #[test]
    fn zero_level_is_identity() {
        let d = crate::data::gen_figure1(crate::data::Scenario::Easy, 40, 0).unwrap();
        for c in [
            Corruption::Outliers,
            Corruption::Imbalance,
            Corruption::Ambiguous,
        ] {
            assert_eq!(c.apply(&d, 0.0, 1).unwrap(), d);
        }
    }
}
