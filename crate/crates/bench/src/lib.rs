//! Shared fixtures for the criterion benchmarks.

use closek_core::data::{gen_figure1, Scenario};
use closek_core::LabeledDataset;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Deterministic pseudo-random loss vector in `[0, 3)`.
pub fn loss_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(0.0..3.0)).collect()
}

pub fn ambiguous_panel(n: usize) -> LabeledDataset {
    gen_figure1(Scenario::Ambiguous, n, 7).expect("valid panel size")
}
