//! Training-set corruptions: far outliers, duplicated majority rows, and
//! contradictory copies. None of them mutate their input.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::LabeledDataset;
use crate::error::{DatasetError, Error, Result};

/// `⌈fraction · n⌉`, tolerant of the float error in products like `0.05 × 1000`.
fn count_for(fraction: f64, n: usize) -> usize {
    (fraction * n as f64 - 1e-9).ceil().max(0.0) as usize
}

fn check_fraction(fraction: f64) -> Result<()> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::invalid(format!(
            "fraction {fraction} outside (0, 1)"
        )));
    }
    Ok(())
}

/// `10·x₂ − 9·x₁`: a point past `x₂` on the far side from `x₁`.
pub fn outlier_point(own_class: &[f64], other_class: &[f64]) -> Vec<f64> {
    own_class
        .iter()
        .zip(other_class)
        .map(|(a, b)| 10.0 * b - 9.0 * a)
        .collect()
}

/// Appends `⌈fraction·n⌉` outliers. Each picks a class `c` in proportion to
/// the class frequencies, one row `x₁` of class `c` and one row `x₂` of the
/// other class, and gets features `10·x₂ − 9·x₁` with label `c`.
pub fn inject_outliers(data: &LabeledDataset, fraction: f64, seed: u64) -> Result<LabeledDataset> {
    check_fraction(fraction)?;
    let pos = data.indices_with_label(1.0);
    let neg = data.indices_with_label(-1.0);
    if pos.is_empty() || neg.is_empty() {
        return Err(DatasetError::SingleClass.into());
    }
    let count = count_for(fraction, data.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = Vec::with_capacity(count * data.dim());
    let mut labels = Vec::with_capacity(count);
    for _ in 0..count {
        let c = data.label(rng.random_range(0..data.len()));
        let (own, other) = if c > 0.0 { (&pos, &neg) } else { (&neg, &pos) };
        let x1 = data.row(own[rng.random_range(0..own.len())]);
        let x2 = data.row(other[rng.random_range(0..other.len())]);
        features.extend(outlier_point(x1, x2));
        labels.push(c);
    }
    data.with_appended(&features, &labels)
}

/// Duplicates uniformly drawn negative rows until negatives make up at least
/// `target` of the data. Already-imbalanced inputs come back unchanged.
pub fn amplify_imbalance(data: &LabeledDataset, target: f64, seed: u64) -> Result<LabeledDataset> {
    if !(target > 0.5 && target < 1.0) {
        return Err(Error::invalid(format!(
            "target majority {target} outside (0.5, 1)"
        )));
    }
    let neg = data.indices_with_label(-1.0);
    if neg.is_empty() {
        return Err(DatasetError::NoNegatives.into());
    }
    let n_neg = neg.len();
    let n_pos = data.len() - n_neg;
    let reached = |added: usize| (n_neg + added) as f64 / (data.len() + added) as f64 >= target;

    let mut added = ((target * n_pos as f64 / (1.0 - target)) - n_neg as f64 - 1e-9)
        .ceil()
        .max(0.0) as usize;
    while added > 0 && reached(added - 1) {
        added -= 1;
    }
    while !reached(added) {
        added += 1;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = Vec::with_capacity(added * data.dim());
    for _ in 0..added {
        features.extend_from_slice(data.row(neg[rng.random_range(0..n_neg)]));
    }
    data.with_appended(&features, &vec![-1.0; added])
}

/// Appends `⌈fraction·n⌉` exact copies of uniformly drawn negative rows,
/// relabeled `+1`.
pub fn add_ambiguous(data: &LabeledDataset, fraction: f64, seed: u64) -> Result<LabeledDataset> {
    check_fraction(fraction)?;
    let neg = data.indices_with_label(-1.0);
    if neg.is_empty() {
        return Err(DatasetError::NoNegatives.into());
    }
    let count = count_for(fraction, data.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = Vec::with_capacity(count * data.dim());
    for _ in 0..count {
        features.extend_from_slice(data.row(neg[rng.random_range(0..neg.len())]));
    }
    data.with_appended(&features, &vec![1.0; count])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(n_pos: usize, n_neg: usize) -> LabeledDataset {
        let rows: Vec<Vec<f64>> = (0..n_pos + n_neg)
            .map(|i| vec![i as f64, (i * i) as f64 * 0.01])
            .collect();
        let labels = (0..n_pos + n_neg)
            .map(|i| if i < n_pos { 1.0 } else { -1.0 })
            .collect();
        LabeledDataset::from_rows("b", &rows, labels).unwrap()
    }

    #[test]
    fn outlier_formula() {
        assert_eq!(outlier_point(&[0.0, 0.0], &[1.0, 1.0]), vec![10.0, 10.0]);
        assert_eq!(outlier_point(&[2.5, -1.0], &[2.5, -1.0]), vec![2.5, -1.0]);
    }

    #[test]
    fn outlier_count_and_provenance() {
        let d = base(400, 600);
        let out = inject_outliers(&d, 0.05, 1).unwrap();
        assert_eq!(out.len(), 1050);
        assert_eq!(&out.features()[..d.features().len()], d.features());
        // every appended row is 10*x2 - 9*x1 for some x1 of its class and x2 of the other
        for i in 1000..1050 {
            let c = out.label(i);
            let row = out.row(i);
            let found = d.indices_with_label(c).iter().any(|&a| {
                d.indices_with_label(-c)
                    .iter()
                    .any(|&b| outlier_point(d.row(a), d.row(b)) == row)
            });
            assert!(found, "row {i}");
        }
    }

    #[test]
    fn outliers_need_two_classes() {
        let d = base(0, 10);
        assert!(matches!(
            inject_outliers(&d, 0.1, 0),
            Err(Error::Dataset(DatasetError::SingleClass))
        ));
    }

    #[test]
    fn imbalance_reaches_target_minimally() {
        // 39 positives, 61 negatives: 0.8 needs N' >= 4P = 156 → 95 duplicates
        let d = base(39, 61);
        let out = amplify_imbalance(&d, 0.8, 4).unwrap();
        assert_eq!(out.len() - d.len(), 95);
        let frac = out.count_negative() as f64 / out.len() as f64;
        assert!(frac >= 0.8 && frac < 0.8 + 1.0 / out.len() as f64);
    }

    #[test]
    fn imbalance_noop_when_already_there() {
        let d = base(10, 90);
        assert_eq!(amplify_imbalance(&d, 0.85, 0).unwrap(), d);
        assert!(amplify_imbalance(&base(5, 0), 0.8, 0).is_err());
    }

    #[test]
    fn ambiguous_copies() {
        let d = base(500, 500);
        let out = add_ambiguous(&d, 0.1, 2).unwrap();
        assert_eq!(out.len(), 1100);
        for i in 1000..1100 {
            assert_eq!(out.label(i), 1.0);
            let twin = (500..1000).find(|&j| d.row(j) == out.row(i));
            assert!(twin.is_some());
        }
        assert!(add_ambiguous(&base(3, 0), 0.5, 0).is_err());
    }

    #[test]
    fn transforms_do_not_touch_input() {
        let d = base(20, 30);
        let copy = d.clone();
        let _ = inject_outliers(&d, 0.2, 0).unwrap();
        let _ = amplify_imbalance(&d, 0.9, 0).unwrap();
        let _ = add_ambiguous(&d, 0.2, 0).unwrap();
        assert_eq!(d, copy);
    }
}
