//! Individual surrogate losses and the aggregate losses built on top of them.
//!
//! An aggregate loss collapses the `n` per-example losses of a batch into one
//! training objective and decides which examples carry gradient. The close-k
//! aggregate keeps only the `k` examples whose loss is nearest the
//! correctness threshold `T`; every other example contributes a constant
//! (0 when correct, `M` when incorrect) and therefore no gradient.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Surrogate loss applied to a single (label, score) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IndividualLoss {
    Logistic,
    Hinge,
}

impl IndividualLoss {
    /// Loss value at zero margin: `ln 2` for logistic, `1` for hinge.
    pub fn threshold(self) -> f64 {
        match self {
            IndividualLoss::Logistic => std::f64::consts::LN_2,
            IndividualLoss::Hinge => 1.0,
        }
    }

    /// `ℓ(y, score)`. `y` is expected to be `±1`.
    pub fn value(self, y: f64, score: f64) -> Result<f64> {
        if !score.is_finite() {
            return Err(Error::NonFiniteScore(score));
        }
        let margin = y * score;
        Ok(match self {
            IndividualLoss::Logistic => softplus(-margin),
            IndividualLoss::Hinge => (1.0 - margin).max(0.0),
        })
    }

    /// `dℓ/dscore`. The hinge kink at margin 1 takes subgradient 0.
    pub fn derivative(self, y: f64, score: f64) -> Result<f64> {
        if !score.is_finite() {
            return Err(Error::NonFiniteScore(score));
        }
        let margin = y * score;
        Ok(match self {
            // -y * sigmoid(-margin)
            IndividualLoss::Logistic => -y * sigmoid(-margin),
            IndividualLoss::Hinge => {
                if margin < 1.0 {
                    -y
                } else {
                    0.0
                }
            }
        })
    }

    /// An individual loss below `T` means the example is classified correctly.
    /// A loss exactly at `T` (zero margin) counts as incorrect.
    pub fn is_correct(self, loss: f64) -> bool {
        loss < self.threshold()
    }
}

impl fmt::Display for IndividualLoss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IndividualLoss::Logistic => "logistic",
            IndividualLoss::Hinge => "hinge",
        })
    }
}

impl FromStr for IndividualLoss {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "logistic" => Ok(IndividualLoss::Logistic),
            "hinge" => Ok(IndividualLoss::Hinge),
            other => Err(Error::invalid(format!("unknown loss `{other}`"))),
        }
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Aggregate loss over a batch of individual losses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AggregateLoss {
    /// Mean of all losses.
    Average,
    /// The k-th largest loss.
    TopK(usize),
    /// Mean of the k largest losses.
    AverageTopK(usize),
    /// Sum of the k losses closest to the threshold, plus 0 / `M` for the rest.
    CloseK(usize),
}

impl AggregateLoss {
    pub fn k(&self) -> Option<usize> {
        match *self {
            AggregateLoss::Average => None,
            AggregateLoss::TopK(k) | AggregateLoss::AverageTopK(k) | AggregateLoss::CloseK(k) => {
                Some(k)
            }
        }
    }

    /// Evaluate the aggregate and the set of examples that receive gradient.
    pub fn evaluate(&self, losses: &[f64], threshold: f64) -> Result<LossReport> {
        aggregate_value_and_mask(*self, losses, threshold)
    }
}

/// Result of evaluating an aggregate loss on one batch.
#[derive(Debug, Clone, PartialEq)]
pub struct LossReport {
    pub value: f64,
    /// Examples contributing gradient, in selection order.
    pub selected: Vec<usize>,
    /// `mask[i]` is true exactly when `i` is in `selected`.
    pub mask: Vec<bool>,
    /// `d value / d ℓ_i` for every example; zero outside the mask.
    pub weights: Vec<f64>,
    /// The constant used for unselected incorrect examples (close-k only).
    pub big_m: Option<f64>,
}

/// `M = max(10, 10 × largest loss)`, recomputed for every batch so it always
/// dominates the individual losses.
pub fn dynamic_m(losses: &[f64]) -> f64 {
    let max = losses.iter().copied().fold(0.0_f64, f64::max);
    (10.0 * max).max(10.0)
}

fn check_losses(losses: &[f64]) -> Result<()> {
    if losses.is_empty() {
        return Err(Error::invalid("empty loss vector"));
    }
    if let Some(bad) = losses.iter().find(|l| !l.is_finite() || **l < 0.0) {
        return Err(Error::invalid(format!(
            "loss {bad} is not finite and nonnegative"
        )));
    }
    Ok(())
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::invalid(format!("k = {k} outside [1, {n}]")));
    }
    Ok(())
}

/// Indices of the first `k` elements under `cmp`, sorted. `cmp` must be a
/// total order (callers break ties by index), so the output is deterministic.
fn first_k_by<F>(n: usize, k: usize, mut cmp: F) -> Vec<usize>
where
    F: FnMut(&usize, &usize) -> Ordering,
{
    let mut idx: Vec<usize> = (0..n).collect();
    if k < n {
        idx.select_nth_unstable_by(k - 1, &mut cmp);
        idx.truncate(k);
    }
    idx.sort_unstable_by(cmp);
    idx
}

/// Indices of the `k` losses closest to `threshold`, ordered by `|ℓ − T|`
/// with ties broken by ascending index.
pub fn select_close_k(losses: &[f64], threshold: f64, k: usize) -> Result<Vec<usize>> {
    check_losses(losses)?;
    check_k(k, losses.len())?;
    let dist: Vec<f64> = losses.iter().map(|l| (l - threshold).abs()).collect();
    Ok(first_k_by(losses.len(), k, |&a, &b| {
        dist[a].total_cmp(&dist[b]).then(a.cmp(&b))
    }))
}

/// Indices of the `k` largest losses, largest first, ties by ascending index.
pub fn select_largest_k(losses: &[f64], k: usize) -> Result<Vec<usize>> {
    check_losses(losses)?;
    check_k(k, losses.len())?;
    Ok(first_k_by(losses.len(), k, |&a, &b| {
        losses[b].total_cmp(&losses[a]).then(a.cmp(&b))
    }))
}

fn close_k_from_selection(
    losses: &[f64],
    threshold: f64,
    selected: &[usize],
    mask: &[bool],
    big_m: f64,
) -> f64 {
    let near: f64 = selected.iter().map(|&i| losses[i]).sum();
    let far_wrong = losses
        .iter()
        .zip(mask)
        .filter(|&(&l, &chosen)| !chosen && l >= threshold)
        .count();
    near + far_wrong as f64 * big_m
}

/// Close-k aggregate value with an explicit `M`.
pub fn close_k_value(losses: &[f64], threshold: f64, k: usize, big_m: f64) -> Result<f64> {
    let selected = select_close_k(losses, threshold, k)?;
    let max = losses.iter().copied().fold(0.0_f64, f64::max);
    if big_m.is_nan() || big_m < max {
        return Err(Error::invalid(format!(
            "M = {big_m} is smaller than the largest loss {max}"
        )));
    }
    let mask = mask_of(losses.len(), &selected);
    Ok(close_k_from_selection(
        losses, threshold, &selected, &mask, big_m,
    ))
}

fn mask_of(n: usize, selected: &[usize]) -> Vec<bool> {
    let mut mask = vec![false; n];
    for &i in selected {
        mask[i] = true;
    }
    mask
}

/// Value, selected set, mask, and per-example gradient weights for any aggregate.
pub fn aggregate_value_and_mask(
    spec: AggregateLoss,
    losses: &[f64],
    threshold: f64,
) -> Result<LossReport> {
    check_losses(losses)?;
    let n = losses.len();
    let (value, selected, weight, big_m) = match spec {
        AggregateLoss::Average => {
            let value = losses.iter().sum::<f64>() / n as f64;
            (value, (0..n).collect::<Vec<_>>(), 1.0 / n as f64, None)
        }
        AggregateLoss::TopK(k) => {
            let order = select_largest_k(losses, k)?;
            let kth = order[k - 1];
            (losses[kth], vec![kth], 1.0, None)
        }
        AggregateLoss::AverageTopK(k) => {
            let order = select_largest_k(losses, k)?;
            let value = order.iter().map(|&i| losses[i]).sum::<f64>() / k as f64;
            (value, order, 1.0 / k as f64, None)
        }
        AggregateLoss::CloseK(k) => {
            let selected = select_close_k(losses, threshold, k)?;
            let big_m = dynamic_m(losses);
            let mask = mask_of(n, &selected);
            let value = close_k_from_selection(losses, threshold, &selected, &mask, big_m);
            (value, selected, 1.0, Some(big_m))
        }
    };
    let mask = mask_of(n, &selected);
    let weights = mask.iter().map(|&m| if m { weight } else { 0.0 }).collect();
    Ok(LossReport {
        value,
        selected,
        mask,
        weights,
        big_m,
    })
}
