use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

pub const SIGNIFICANCE_LEVEL: f64 = 0.05;
/// Minimum mean accuracy gain counted as a practical improvement (2 points).
pub const PRACTICAL_GAIN: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedComparison {
    pub p_value: f64,
    /// Mean of `b − a` over the shared splits.
    pub mean_diff: f64,
    pub t_stat: f64,
}

impl PairedComparison {
    /// `b` significantly beats `a`.
    pub fn significant_win(&self) -> bool {
        self.p_value <= SIGNIFICANCE_LEVEL && self.mean_diff > 0.0
    }

    pub fn practical_win(&self) -> bool {
        self.mean_diff >= PRACTICAL_GAIN - 1e-12
    }
}

/// Two-sided paired t-test on per-split accuracies.
///
/// Constant nonzero differences give `p = 0`; identical vectors give `p = 1`.
pub fn compare(a: &[f64], b: &[f64]) -> Result<PairedComparison> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(Error::invalid("paired t-test needs at least two splits"));
    }
    let n = a.len() as f64;
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
    let mean = diffs.iter().sum::<f64>() / n;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
    // differences equal up to rounding count as constant
    let scale = diffs.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
    if var.sqrt() <= 1e-12 * scale.max(1e-300) || var == 0.0 {
        let p_value = if mean.abs() <= 1e-15 { 1.0 } else { 0.0 };
        let t_stat = if p_value == 1.0 {
            0.0
        } else {
            mean.signum() * f64::INFINITY
        };
        return Ok(PairedComparison {
            p_value,
            mean_diff: if p_value == 1.0 { 0.0 } else { mean },
            t_stat,
        });
    }
    let t_stat = mean / (var / n).sqrt();
    let dist = StudentsT::new(0.0, 1.0, n - 1.0).expect("df >= 1");
    let p_value = (2.0 * dist.sf(t_stat.abs())).min(1.0);
    Ok(PairedComparison {
        p_value,
        mean_diff: mean,
        t_stat,
    })
}
