//! Synthetic constructions where average-style aggregates fail.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::LabeledDataset;
use crate::error::{Error, Result};

/// `n` points at `(−1, −1)`, `n` at `(+1, +1)`, and two outliers
/// `(+m, −1)` and `(−m, +1)`. Optimal linear 0-1 loss is 2.
pub fn gen_example1(n: usize, outlier_magnitude: f64) -> Result<LabeledDataset> {
    if n == 0 {
        return Err(Error::invalid("example1 needs n >= 1"));
    }
    if !outlier_magnitude.is_finite() || outlier_magnitude <= n as f64 {
        return Err(Error::invalid(format!(
            "outlier magnitude {outlier_magnitude} must exceed n = {n}"
        )));
    }
    let mut xs = Vec::with_capacity(2 * n + 2);
    let mut ys = Vec::with_capacity(2 * n + 2);
    xs.extend(std::iter::repeat_n(-1.0, n));
    ys.extend(std::iter::repeat_n(-1.0, n));
    xs.extend(std::iter::repeat_n(1.0, n));
    ys.extend(std::iter::repeat_n(1.0, n));
    xs.extend([outlier_magnitude, -outlier_magnitude]);
    ys.extend([-1.0, 1.0]);
    LabeledDataset::new(format!("example1_n{n}"), 1, xs, ys)
}

/// `n` negatives uniform on `(−1, 1)` and `n` positives uniform on `(0, 1)`.
/// The best threshold (positive for `x > 0`) reaches accuracy 0.75.
pub fn gen_example2(n: usize, seed: u64) -> Result<LabeledDataset> {
    if n == 0 {
        return Err(Error::invalid("example2 needs n >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut xs: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    xs.extend((0..n).map(|_| rng.random_range(0.0..1.0)));
    let mut ys = vec![-1.0; n];
    ys.extend(std::iter::repeat_n(1.0, n));
    LabeledDataset::new(format!("example2_n{n}"), 1, xs, ys)
}

/// Two-dimensional panels in which the vertical line `x = 0` attains the
/// optimal linear 0-1 error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    /// Separable; the negative class carries a large mass of points far from
    /// the boundary.
    Easy,
    /// Separable with a 9:1 class ratio.
    Imbalance,
    /// `Imbalance` plus a small minority-labeled cluster deep on the majority side.
    ImbalanceOutlier,
    /// Overlapping uniform strips: the 2-D version of example 2.
    Ambiguous,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::Easy,
        Scenario::Imbalance,
        Scenario::ImbalanceOutlier,
        Scenario::Ambiguous,
    ];
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::Easy => "easy",
            Scenario::Imbalance => "imbalance",
            Scenario::ImbalanceOutlier => "imbalance_outlier",
            Scenario::Ambiguous => "ambiguous",
        })
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "easy" => Ok(Scenario::Easy),
            "imbalance" => Ok(Scenario::Imbalance),
            "imbalance_outlier" | "outlier" => Ok(Scenario::ImbalanceOutlier),
            "ambiguous" => Ok(Scenario::Ambiguous),
            other => Err(Error::invalid(format!("unknown scenario `{other}`"))),
        }
    }
}

/// Gaussian cluster restricted to one side of `x = 0` by rejection.
struct Cluster {
    center: [f64; 2],
    spread: [f64; 2],
    /// Points must satisfy `side · x >= gap`.
    side: f64,
    gap: f64,
}

impl Cluster {
    fn sample(&self, rng: &mut ChaCha8Rng, count: usize, out: &mut Vec<f64>) {
        let nx = Normal::new(self.center[0], self.spread[0]).expect("valid spread");
        let ny = Normal::new(self.center[1], self.spread[1]).expect("valid spread");
        let mut drawn = 0;
        while drawn < count {
            let x = nx.sample(rng);
            if self.side * x < self.gap {
                continue;
            }
            out.push(x);
            out.push(ny.sample(rng));
            drawn += 1;
        }
    }
}

/// Generates one panel with `n` points in total.
pub fn gen_figure1(scenario: Scenario, n: usize, seed: u64) -> Result<LabeledDataset> {
    if n < 4 {
        return Err(Error::invalid("figure1 panels need n >= 4"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    let mut push =
        |rng: &mut ChaCha8Rng, c: Cluster, count: usize, y: f64, labels: &mut Vec<f64>| {
            c.sample(rng, count, &mut features);
            labels.extend(std::iter::repeat_n(y, count));
        };

    match scenario {
        Scenario::Easy => {
            let n_pos = n / 2;
            let n_near = n / 10;
            let n_far = n - n_pos - n_near;
            push(
                &mut rng,
                Cluster {
                    center: [1.0, 0.0],
                    spread: [0.5, 3.0],
                    side: 1.0,
                    gap: 0.1,
                },
                n_pos,
                1.0,
                &mut labels,
            );
            push(
                &mut rng,
                Cluster {
                    center: [-1.0, 0.0],
                    spread: [0.5, 3.0],
                    side: -1.0,
                    gap: 0.1,
                },
                n_near,
                -1.0,
                &mut labels,
            );
            push(
                &mut rng,
                Cluster {
                    center: [-6.0, 15.0],
                    spread: [1.0, 1.0],
                    side: -1.0,
                    gap: 0.1,
                },
                n_far,
                -1.0,
                &mut labels,
            );
        }
        Scenario::Imbalance | Scenario::ImbalanceOutlier => {
            let n_out = if scenario == Scenario::ImbalanceOutlier {
                (n / 100).max(1)
            } else {
                0
            };
            let n_min = (n - n_out) / 10;
            let n_maj = n - n_out - n_min;
            push(
                &mut rng,
                Cluster {
                    center: [-2.0, 0.0],
                    spread: [1.5, 3.0],
                    side: -1.0,
                    gap: 0.05,
                },
                n_maj,
                -1.0,
                &mut labels,
            );
            push(
                &mut rng,
                Cluster {
                    center: [0.5, 0.0],
                    spread: [0.4, 3.0],
                    side: 1.0,
                    gap: 0.05,
                },
                n_min,
                1.0,
                &mut labels,
            );
            if n_out > 0 {
                push(
                    &mut rng,
                    Cluster {
                        center: [-6.0, 0.0],
                        spread: [0.5, 0.5],
                        side: -1.0,
                        gap: 0.05,
                    },
                    n_out,
                    1.0,
                    &mut labels,
                );
            }
        }
        Scenario::Ambiguous => {
            let n_neg = n / 2;
            let n_pos = n - n_neg;
            for _ in 0..n_neg {
                features.push(rng.random_range(-1.0..1.0));
                features.push(rng.random_range(-1.0..1.0));
                labels.push(-1.0);
            }
            for _ in 0..n_pos {
                features.push(rng.random_range(0.0..1.0));
                features.push(rng.random_range(-1.0..1.0));
                labels.push(1.0);
            }
        }
    }
    LabeledDataset::new(format!("figure1_{scenario}"), 2, features, labels)
}
