/// Best one-dimensional threshold classifier found by exhaustive scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdScan {
    pub errors: usize,
    pub n: usize,
    pub threshold: f64,
    /// `+1`: predict positive for `x > threshold`; `-1`: the reverse.
    pub orientation: f64,
}

impl ThresholdScan {
    pub fn accuracy(&self) -> f64 {
        1.0 - self.errors as f64 / self.n as f64
    }

    pub fn error_rate(&self) -> f64 {
        self.errors as f64 / self.n as f64
    }
}

/// Exact minimum 0-1 error of `sign(o · (x − t))` over every cut position
/// between distinct sorted values (plus both ends) and both orientations.
/// Points with equal `x` always land on the same side.
pub fn threshold_scan(xs: &[f64], ys: &[f64]) -> ThresholdScan {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));

    let total_pos = ys.iter().filter(|&&y| y > 0.0).count();
    let total_neg = n - total_pos;

    // Cut before everything: all points on the right.
    let mut left_pos = 0usize;
    let mut left_neg = 0usize;
    let lowest = order.first().map_or(0.0, |&i| xs[i]);
    let mut best = candidate(left_pos, left_neg, total_pos, total_neg, lowest - 1.0, n);

    let mut i = 0;
    while i < n {
        let x = xs[order[i]];
        while i < n && xs[order[i]] == x {
            if ys[order[i]] > 0.0 {
                left_pos += 1;
            } else {
                left_neg += 1;
            }
            i += 1;
        }
        let cut = if i < n {
            0.5 * (x + xs[order[i]])
        } else {
            x + 1.0
        };
        let c = candidate(left_pos, left_neg, total_pos, total_neg, cut, n);
        if c.errors < best.errors {
            best = c;
        }
    }
    best
}

fn candidate(lp: usize, ln: usize, tp: usize, tn: usize, cut: f64, n: usize) -> ThresholdScan {
    // right side positive: errors are left positives + right negatives
    let up = lp + (tn - ln);
    // right side negative
    let down = ln + (tp - lp);
    if up <= down {
        ThresholdScan {
            errors: up,
            n,
            threshold: cut,
            orientation: 1.0,
        }
    } else {
        ThresholdScan {
            errors: down,
            n,
            threshold: cut,
            orientation: -1.0,
        }
    }
}
