use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loss::AggregateLoss;
use crate::optim::Objective;

/// Aggregate methods compared by the harness, in table order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Close,
    CloseDecay,
    Atk,
    Average,
    Top,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Close,
        Method::CloseDecay,
        Method::Atk,
        Method::Average,
        Method::Top,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Close => "close",
            Method::CloseDecay => "close_decay",
            Method::Atk => "atk",
            Method::Average => "average",
            Method::Top => "top",
        }
    }

    pub fn uses_k(self) -> bool {
        self != Method::Average
    }

    /// Training objective for this method at grid value `k` (ignored by average).
    pub fn objective(self, k: usize) -> Objective {
        match self {
            Method::Close => Objective::Fixed(AggregateLoss::CloseK(k)),
            Method::CloseDecay => Objective::CloseDecay { k_star: k },
            Method::Atk => Objective::Fixed(AggregateLoss::AverageTopK(k)),
            Method::Average => Objective::Fixed(AggregateLoss::Average),
            Method::Top => Objective::Fixed(AggregateLoss::TopK(k)),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s
            .trim()
            .to_ascii_lowercase()
            .replace(['-', ' '], "_")
            .as_str()
        {
            "close" => Ok(Method::Close),
            "close_decay" | "decay" => Ok(Method::CloseDecay),
            "atk" | "average_top_k" => Ok(Method::Atk),
            "average" | "avg" => Ok(Method::Average),
            "top" | "top_k" => Ok(Method::Top),
            other => Err(Error::invalid(format!("unknown method `{other}`"))),
        }
    }
}

/// Parses a comma-separated method list, rejecting duplicates.
pub fn parse_methods(s: &str) -> Result<Vec<Method>> {
    let mut out: Vec<Method> = Vec::new();
    for part in s.split(',').filter(|p| !p.trim().is_empty()) {
        let m: Method = part.parse()?;
        if out.contains(&m) {
            return Err(Error::invalid(format!("method `{m}` listed twice")));
        }
        out.push(m);
    }
    if out.is_empty() {
        return Err(Error::invalid("no methods given"));
    }
    Ok(out)
}

/// `{10⁻⁵, 10⁻⁴, …, 10⁵}`.
pub fn default_lambdas() -> Vec<f64> {
    (-5..=5).map(|e| 10f64.powi(e)).collect()
}

/// `{10, 10², …, 10^⌊log₁₀ n⌋, n}`; just `{n}` when `n < 10`.
pub fn k_grid(n: usize) -> Vec<usize> {
    let mut ks = Vec::new();
    let mut k = 10usize;
    while k < n {
        ks.push(k);
        k = match k.checked_mul(10) {
            Some(next) => next,
            None => break,
        };
    }
    ks.push(n);
    ks
}

/// Hyperparameter grid for one method on a training set of size `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub lambdas: Vec<f64>,
    pub ks: Vec<usize>,
}

impl GridSpec {
    /// `ks_override` replaces the power-of-ten grid; values above `n` are
    /// dropped and `n` itself is kept only if listed.
    pub fn for_method(
        method: Method,
        n: usize,
        lambdas: &[f64],
        ks_override: Option<&[usize]>,
    ) -> Self {
        let ks = if !method.uses_k() {
            vec![n]
        } else if let Some(ks) = ks_override {
            let mut ks: Vec<usize> = ks.iter().copied().filter(|&k| k >= 1 && k <= n).collect();
            ks.sort_unstable();
            ks.dedup();
            if ks.is_empty() {
                vec![n]
            } else {
                ks
            }
        } else {
            k_grid(n)
        };
        GridSpec {
            lambdas: lambdas.to_vec(),
            ks,
        }
    }

    pub fn len(&self) -> usize {
        self.lambdas.len() * self.ks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Candidates in selection-priority order: λ ascending, then k ascending.
    pub fn candidates(&self) -> Vec<(f64, usize)> {
        self.lambdas
            .iter()
            .flat_map(|&l| self.ks.iter().map(move |&k| (l, k)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_grid_examples() {
        assert_eq!(k_grid(5000), vec![10, 100, 1000, 5000]);
        assert_eq!(k_grid(1000), vec![10, 100, 1000]);
        assert_eq!(k_grid(7), vec![7]);
        assert_eq!(k_grid(10), vec![10]);
        assert_eq!(k_grid(11), vec![10, 11]);
    }

    #[test]
    fn lambda_grid_has_eleven_decades() {
        let l = default_lambdas();
        assert_eq!(l.len(), 11);
        assert_eq!(l[0], 1e-5);
        assert_eq!(l[10], 1e5);
    }

    #[test]
    fn grid_sizes() {
        let lambdas = default_lambdas();
        assert_eq!(
            GridSpec::for_method(Method::Average, 5000, &lambdas, None).len(),
            11
        );
        assert_eq!(
            GridSpec::for_method(Method::Close, 5000, &lambdas, None).len(),
            44
        );
        let g = GridSpec::for_method(Method::Top, 50, &[0.1], Some(&[100, 5, 5, 1]));
        assert_eq!(g.ks, vec![1, 5]);
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!(parse_methods("close,close").is_err());
        assert_eq!(
            parse_methods("average, close_decay").unwrap(),
            vec![Method::Average, Method::CloseDecay]
        );
    }
}
