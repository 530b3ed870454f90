use super::grid::Method;
use super::protocol::DatasetResults;
use super::stats::compare;
use crate::error::Result;

/// Pairwise win fractions over a corpus. Entry `[i][j]` is the fraction of
/// datasets on which method `j` beat method `i`; the diagonal is `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonMatrix {
    pub methods: Vec<Method>,
    pub datasets: usize,
    /// Wins at `p ≤ 0.05` with positive mean difference.
    pub significant: Vec<Vec<Option<f64>>>,
    /// Mean test accuracy gain of at least 2 points, regardless of `p`.
    pub two_point: Vec<Vec<Option<f64>>>,
}

impl ComparisonMatrix {
    fn index(&self, m: Method) -> Option<usize> {
        self.methods.iter().position(|&x| x == m)
    }

    /// Fraction of datasets where `col` significantly beat `row`.
    pub fn significant_fraction(&self, row: Method, col: Method) -> Option<f64> {
        self.significant[self.index(row)?][self.index(col)?]
    }

    pub fn two_point_fraction(&self, row: Method, col: Method) -> Option<f64> {
        self.two_point[self.index(row)?][self.index(col)?]
    }
}

/// Builds both matrices over the methods present in every dataset.
pub fn build_matrix(results: &[DatasetResults]) -> Result<ComparisonMatrix> {
    let methods: Vec<Method> = Method::ALL
        .into_iter()
        .filter(|&m| !results.is_empty() && results.iter().all(|d| d.method(m).is_some()))
        .collect();
    let k = methods.len();
    let mut sig = vec![vec![0usize; k]; k];
    let mut gain = vec![vec![0usize; k]; k];
    for d in results {
        for (i, &mi) in methods.iter().enumerate() {
            for (j, &mj) in methods.iter().enumerate() {
                if i == j {
                    continue;
                }
                let a = d.method(mi).expect("filtered").test_accuracies();
                let b = d.method(mj).expect("filtered").test_accuracies();
                let c = compare(&a, &b)?;
                sig[i][j] += c.significant_win() as usize;
                gain[i][j] += c.practical_win() as usize;
            }
        }
    }
    let total = results.len().max(1) as f64;
    let to_frac = |counts: Vec<Vec<usize>>| -> Vec<Vec<Option<f64>>> {
        counts
            .into_iter()
            .enumerate()
            .map(|(i, row)| {
                row.into_iter()
                    .enumerate()
                    .map(|(j, c)| (i != j).then(|| c as f64 / total))
                    .collect()
            })
            .collect()
    };
    Ok(ComparisonMatrix {
        methods,
        datasets: results.len(),
        significant: to_frac(sig),
        two_point: to_frac(gain),
    })
}

/// One point of the k* plot: how small the selected k* was relative to the
/// training size, and how much close-decay gained over average.
#[derive(Debug, Clone, PartialEq)]
pub struct KStarRow {
    pub dataset: String,
    /// Mean of `k*/n_train` over splits.
    pub k_star_fraction: f64,
    /// Mean test accuracy of close-decay minus that of average.
    pub accuracy_gain: f64,
}

/// One row per dataset that has both close-decay and average results.
pub fn k_star_summary(results: &[DatasetResults]) -> Vec<KStarRow> {
    results
        .iter()
        .filter_map(|d| {
            let decay = d.method(Method::CloseDecay)?;
            let avg = d.method(Method::Average)?;
            let fracs: Vec<f64> = decay
                .outcomes
                .iter()
                .filter_map(|o| o.k.map(|k| k as f64 / o.n_train as f64))
                .collect();
            Some(KStarRow {
                dataset: d.dataset.clone(),
                k_star_fraction: fracs.iter().sum::<f64>() / fracs.len() as f64,
                accuracy_gain: decay.mean_test_accuracy() - avg.mean_test_accuracy(),
            })
        })
        .collect()
}
