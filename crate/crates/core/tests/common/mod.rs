//! Independent oracles shared by the integration and acceptance suites.
#![allow(dead_code)]

use closek_core::data::Standardizer;
use closek_core::loss::close_k_value;
use closek_core::{AggregateLoss, IndividualLoss, LabeledDataset, Model};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Misclassification count of `f(x) = s·a·(x − t)` on 1-D data.
pub fn threshold_errors(xs: &[f64], ys: &[f64], s: f64, t: f64) -> usize {
    xs.iter()
        .zip(ys)
        .filter(|&(&x, &y)| y * s * (x - t) <= 0.0)
        .count()
}

/// Finite family of 1-D threshold classifiers `a·s·(x − t)`: cuts at every
/// midpoint and beyond both ends, both orientations, several slopes.
pub fn threshold_family(xs: &[f64]) -> Vec<(f64, f64, f64)> {
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let mut cuts = vec![sorted[0] - 1.0, sorted[sorted.len() - 1] + 1.0];
    cuts.extend(sorted.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    let mut family = Vec::new();
    for &t in &cuts {
        for s in [-1.0, 1.0] {
            for a in [0.5, 1.0, 3.0] {
                family.push((a, s, t));
            }
        }
    }
    family
}

/// Outcome of the exhaustive small-instance check for one dataset and one k.
#[derive(Debug, Clone, Copy)]
pub struct LemmaCase {
    pub n: usize,
    pub k: usize,
    /// Worst 0-1 loss among exact close-k minimizers over the family.
    pub close_k_errors: usize,
    /// Exact 0-1 minimum over the family.
    pub best_errors: usize,
}

/// For every k, enumerates the family, finds every exact minimizer of the
/// close-k value (fixed large M) and reports the worst 0-1 loss among them.
pub fn lemma_cases(xs: &[f64], ys: &[f64], loss: IndividualLoss) -> Vec<LemmaCase> {
    let n = xs.len();
    let family = threshold_family(xs);
    let losses: Vec<Vec<f64>> = family
        .iter()
        .map(|&(a, s, t)| {
            xs.iter()
                .zip(ys)
                .map(|(&x, &y)| loss.value(y, a * s * (x - t)).unwrap())
                .collect()
        })
        .collect();
    let errors: Vec<usize> = family
        .iter()
        .map(|&(_, s, t)| threshold_errors(xs, ys, s, t))
        .collect();
    let max_loss = losses.iter().flatten().copied().fold(1.0_f64, f64::max);
    let big_m = 100.0 * n as f64 * max_loss;
    let best_errors = *errors.iter().min().unwrap();

    (1..=n)
        .map(|k| {
            let values: Vec<f64> = losses
                .iter()
                .map(|l| close_k_value(l, loss.threshold(), k, big_m).unwrap())
                .collect();
            let min = values.iter().copied().fold(f64::INFINITY, f64::min);
            let close_k_errors = values
                .iter()
                .zip(&errors)
                .filter(|(v, _)| **v == min)
                .map(|(_, &e)| e)
                .max()
                .unwrap();
            LemmaCase {
                n,
                k,
                close_k_errors,
                best_errors,
            }
        })
        .collect()
}

/// Random 1-D dataset with distinct, well-separated points and both labels.
pub fn random_small_dataset(rng: &mut ChaCha8Rng, n: usize) -> (Vec<f64>, Vec<f64>) {
    loop {
        let mut xs: Vec<f64> = (0..n)
            .map(|i| i as f64 + rng.random_range(-0.3..0.3))
            .collect();
        for i in (1..n).rev() {
            xs.swap(i, rng.random_range(0..=i));
        }
        let ys: Vec<f64> = (0..n)
            .map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 })
            .collect();
        if ys.contains(&1.0) && ys.contains(&-1.0) {
            return (xs, ys);
        }
    }
}

/// Central finite differences of the aggregate value over the flat
/// parameters. For close-k the selection-independent constant `big_m` is
/// held at the given value.
pub fn finite_difference(
    model: &Model,
    data: &LabeledDataset,
    loss: IndividualLoss,
    spec: AggregateLoss,
    big_m: Option<f64>,
    h: f64,
) -> Vec<f64> {
    let value = |m: &Model| -> f64 {
        let losses: Vec<f64> = data
            .rows()
            .zip(data.labels())
            .map(|(x, &y)| loss.value(y, m.forward(x).unwrap()).unwrap())
            .collect();
        match (spec, big_m) {
            (AggregateLoss::CloseK(k), Some(bm)) => {
                close_k_value(&losses, loss.threshold(), k, bm).unwrap()
            }
            _ => spec.evaluate(&losses, loss.threshold()).unwrap().value,
        }
    };
    let theta = model.flat_params();
    let mut probe = model.clone();
    (0..theta.len())
        .map(|j| {
            let mut p = theta.clone();
            p[j] = theta[j] + h;
            probe.set_flat_params(&p).unwrap();
            let up = value(&probe);
            p[j] = theta[j] - h;
            probe.set_flat_params(&p).unwrap();
            let down = value(&probe);
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Two-sided paired sign-flip permutation test on `b − a`.
pub fn permutation_p_value(a: &[f64], b: &[f64], rounds: usize, seed: u64) -> f64 {
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
    let observed = diffs.iter().sum::<f64>().abs();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut extreme = 0usize;
    for _ in 0..rounds {
        let s: f64 = diffs
            .iter()
            .map(|d| if rng.random_bool(0.5) { *d } else { -*d })
            .sum();
        if s.abs() >= observed - 1e-12 {
            extreme += 1;
        }
    }
    (extreme + 1) as f64 / (rounds + 1) as f64
}

/// Standardizes `train` and every other set with statistics from `train`.
pub fn standardize(
    train: &LabeledDataset,
    others: &[&LabeledDataset],
) -> (LabeledDataset, Vec<LabeledDataset>) {
    let s = Standardizer::fit(train);
    (
        s.apply(train).unwrap(),
        others.iter().map(|d| s.apply(d).unwrap()).collect(),
    )
}
