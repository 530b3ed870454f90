//! Scoring models: a linear classifier and a two-hidden-layer residual MLP.
//!
//! Parameters of every model are exposed as an ordered list of named
//! segments. Gradient buffers use the same flat layout, which keeps
//! updates, finite-difference checks and serialization model-agnostic.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelFamily {
    Linear,
    ResidualMlp,
}

impl fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelFamily::Linear => "linear",
            ModelFamily::ResidualMlp => "residual_mlp",
        })
    }
}

impl FromStr for ModelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "linear" => Ok(ModelFamily::Linear),
            "residual_mlp" | "mlp" | "nn" => Ok(ModelFamily::ResidualMlp),
            other => Err(Error::invalid(format!("unknown model family `{other}`"))),
        }
    }
}

/// `score(x) = <weights, x> + bias`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearModel {
    pub fn zeros(dim: usize) -> Self {
        LinearModel {
            weights: vec![0.0; dim],
            bias: 0.0,
        }
    }
}

/// Two ReLU hidden layers of width `d` with the raw input added to the
/// second hidden activation before the output layer:
///
/// ```text
/// h1 = relu(W1 x + b1)
/// h2 = relu(W2 h1 + b2)
/// score = <w_out, h2 + x> + b_out
/// ```
///
/// Matrices are stored row-major, `d × d`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualMlp {
    pub dim: usize,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
    pub w_out: Vec<f64>,
    pub b_out: f64,
}

impl ResidualMlp {
    pub fn zeros(dim: usize) -> Self {
        ResidualMlp {
            dim,
            w1: vec![0.0; dim * dim],
            b1: vec![0.0; dim],
            w2: vec![0.0; dim * dim],
            b2: vec![0.0; dim],
            w_out: vec![0.0; dim],
            b_out: 0.0,
        }
    }

    /// Weights uniform in `[-1/√d, 1/√d]`, biases zero.
    pub fn init_uniform(dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bound = 1.0 / (dim.max(1) as f64).sqrt();
        let mut draw = |len: usize| -> Vec<f64> {
            (0..len).map(|_| rng.random_range(-bound..=bound)).collect()
        };
        let w1 = draw(dim * dim);
        let w2 = draw(dim * dim);
        let w_out = draw(dim);
        ResidualMlp {
            dim,
            w1,
            b1: vec![0.0; dim],
            w2,
            b2: vec![0.0; dim],
            w_out,
            b_out: 0.0,
        }
    }

    fn hidden(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
        let d = self.dim;
        let z1: Vec<f64> = (0..d)
            .map(|i| dot(&self.w1[i * d..(i + 1) * d], x) + self.b1[i])
            .collect();
        let h1: Vec<f64> = z1.iter().map(|&z| z.max(0.0)).collect();
        let z2: Vec<f64> = (0..d)
            .map(|i| dot(&self.w2[i * d..(i + 1) * d], &h1) + self.b2[i])
            .collect();
        let h2: Vec<f64> = z2.iter().map(|&z| z.max(0.0)).collect();
        (z1, h1, z2, h2)
    }
}

/// Either model family behind one interface.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Linear(LinearModel),
    ResidualMlp(ResidualMlp),
}

/// Accumulated `dL/dθ`, laid out like [`Model::flat_params`].
#[derive(Debug, Clone, PartialEq)]
pub struct GradientBuffer {
    pub values: Vec<f64>,
}

impl GradientBuffer {
    pub fn zero(&mut self) {
        self.values.iter_mut().for_each(|v| *v = 0.0);
    }

    pub fn scale(&mut self, c: f64) {
        self.values.iter_mut().for_each(|v| *v *= c);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Model {
    /// Linear models start at zero; MLPs from a seeded scaled-uniform draw.
    pub fn init(family: ModelFamily, dim: usize, seed: u64) -> Self {
        match family {
            ModelFamily::Linear => Model::Linear(LinearModel::zeros(dim)),
            ModelFamily::ResidualMlp => Model::ResidualMlp(ResidualMlp::init_uniform(dim, seed)),
        }
    }

    pub fn family(&self) -> ModelFamily {
        match self {
            Model::Linear(_) => ModelFamily::Linear,
            Model::ResidualMlp(_) => ModelFamily::ResidualMlp,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Model::Linear(m) => m.weights.len(),
            Model::ResidualMlp(m) => m.dim,
        }
    }

    /// Named parameter segments in flat order; the flag marks L2-penalized weights.
    pub fn segments(&self) -> Vec<(&'static str, &[f64], bool)> {
        match self {
            Model::Linear(m) => vec![
                ("weights", &m.weights[..], true),
                ("bias", std::slice::from_ref(&m.bias), false),
            ],
            Model::ResidualMlp(m) => vec![
                ("W1", &m.w1[..], true),
                ("b1", &m.b1[..], false),
                ("W2", &m.w2[..], true),
                ("b2", &m.b2[..], false),
                ("w_out", &m.w_out[..], true),
                ("b_out", std::slice::from_ref(&m.b_out), false),
            ],
        }
    }

    fn segments_mut(&mut self) -> Vec<(&mut [f64], bool)> {
        match self {
            Model::Linear(m) => vec![
                (&mut m.weights[..], true),
                (std::slice::from_mut(&mut m.bias), false),
            ],
            Model::ResidualMlp(m) => vec![
                (&mut m.w1[..], true),
                (&mut m.b1[..], false),
                (&mut m.w2[..], true),
                (&mut m.b2[..], false),
                (&mut m.w_out[..], true),
                (std::slice::from_mut(&mut m.b_out), false),
            ],
        }
    }

    pub fn num_params(&self) -> usize {
        self.segments().iter().map(|(_, s, _)| s.len()).sum()
    }

    pub fn flat_params(&self) -> Vec<f64> {
        self.segments()
            .into_iter()
            .flat_map(|(_, s, _)| s.iter().copied())
            .collect()
    }

    pub fn set_flat_params(&mut self, flat: &[f64]) -> Result<()> {
        let expected = self.num_params();
        if flat.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: flat.len(),
            });
        }
        let mut offset = 0;
        for (seg, _) in self.segments_mut() {
            seg.copy_from_slice(&flat[offset..offset + seg.len()]);
            offset += seg.len();
        }
        Ok(())
    }

    pub fn zero_grad(&self) -> GradientBuffer {
        GradientBuffer {
            values: vec![0.0; self.num_params()],
        }
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        let score = match self {
            Model::Linear(m) => dot(&m.weights, x) + m.bias,
            Model::ResidualMlp(m) => {
                let (_, _, _, h2) = m.hidden(x);
                let residual: f64 = m
                    .w_out
                    .iter()
                    .zip(h2.iter().zip(x))
                    .map(|(w, (h, xi))| w * (h + xi))
                    .sum();
                residual + m.b_out
            }
        };
        if !score.is_finite() {
            return Err(Error::NonFiniteScore(score));
        }
        Ok(score)
    }

    /// Gradient of `upstream × score(x)` with respect to every parameter.
    pub fn backward(&self, x: &[f64], upstream: f64) -> Result<GradientBuffer> {
        let mut grad = self.zero_grad();
        self.accumulate_grad(x, upstream, &mut grad)?;
        Ok(grad)
    }

    /// Adds `upstream × dscore(x)/dθ` into `grad`.
    pub fn accumulate_grad(
        &self,
        x: &[f64],
        upstream: f64,
        grad: &mut GradientBuffer,
    ) -> Result<()> {
        self.check_dim(x)?;
        if grad.values.len() != self.num_params() {
            return Err(Error::DimensionMismatch {
                expected: self.num_params(),
                found: grad.values.len(),
            });
        }
        if upstream == 0.0 {
            return Ok(());
        }
        let g = &mut grad.values;
        match self {
            Model::Linear(m) => {
                let d = m.weights.len();
                for (gi, xi) in g[..d].iter_mut().zip(x) {
                    *gi += upstream * xi;
                }
                g[d] += upstream;
            }
            Model::ResidualMlp(m) => {
                let d = m.dim;
                let (z1, h1, z2, h2) = m.hidden(x);
                let (gw1, rest) = g.split_at_mut(d * d);
                let (gb1, rest) = rest.split_at_mut(d);
                let (gw2, rest) = rest.split_at_mut(d * d);
                let (gb2, rest) = rest.split_at_mut(d);
                let (gw_out, gb_out) = rest.split_at_mut(d);

                for i in 0..d {
                    gw_out[i] += upstream * (h2[i] + x[i]);
                }
                gb_out[0] += upstream;

                let dz2: Vec<f64> = (0..d)
                    .map(|i| {
                        if z2[i] > 0.0 {
                            upstream * m.w_out[i]
                        } else {
                            0.0
                        }
                    })
                    .collect();
                let mut dh1 = vec![0.0; d];
                for i in 0..d {
                    if dz2[i] == 0.0 {
                        continue;
                    }
                    gb2[i] += dz2[i];
                    let row = &m.w2[i * d..(i + 1) * d];
                    for j in 0..d {
                        gw2[i * d + j] += dz2[i] * h1[j];
                        dh1[j] += row[j] * dz2[i];
                    }
                }
                for i in 0..d {
                    if z1[i] <= 0.0 || dh1[i] == 0.0 {
                        continue;
                    }
                    gb1[i] += dh1[i];
                    for j in 0..d {
                        gw1[i * d + j] += dh1[i] * x[j];
                    }
                }
            }
        }
        Ok(())
    }

    /// `θ ← θ − step × (grad + 2λθ)`, with biases excluded from the penalty.
    /// The model is left untouched if any updated value would be non-finite.
    pub fn apply_update(&mut self, grad: &GradientBuffer, step: f64, lambda: f64) -> Result<()> {
        if grad.values.len() != self.num_params() {
            return Err(Error::DimensionMismatch {
                expected: self.num_params(),
                found: grad.values.len(),
            });
        }
        if lambda < 0.0 || !lambda.is_finite() || !step.is_finite() {
            return Err(Error::invalid(format!(
                "bad step {step} or lambda {lambda}"
            )));
        }
        let mut updated = Vec::with_capacity(grad.values.len());
        let mut offset = 0;
        for (_, seg, penalized) in self.segments() {
            let decay = if penalized { 2.0 * lambda } else { 0.0 };
            for (theta, g) in seg.iter().zip(&grad.values[offset..offset + seg.len()]) {
                let next = theta - step * (g + decay * theta);
                if !next.is_finite() {
                    return Err(Error::NonFiniteUpdate);
                }
                updated.push(next);
            }
            offset += seg.len();
        }
        self.set_flat_params(&updated)
    }

    /// `λ‖weights‖²`, biases excluded.
    pub fn penalty(&self, lambda: f64) -> f64 {
        if lambda == 0.0 {
            return 0.0;
        }
        let sq: f64 = self
            .segments()
            .iter()
            .filter(|(_, _, p)| *p)
            .flat_map(|(_, s, _)| s.iter())
            .map(|v| v * v)
            .sum();
        lambda * sq
    }

    pub fn to_document(&self) -> ModelDocument {
        ModelDocument {
            family: self.family(),
            dim: self.dim(),
            arrays: self
                .segments()
                .into_iter()
                .map(|(name, s, _)| (name.to_string(), s.to_vec()))
                .collect(),
        }
    }

    pub fn from_document(doc: &ModelDocument) -> Result<Self> {
        let mut model = match doc.family {
            ModelFamily::Linear => Model::Linear(LinearModel::zeros(doc.dim)),
            ModelFamily::ResidualMlp => Model::ResidualMlp(ResidualMlp::zeros(doc.dim)),
        };
        let mut flat = Vec::with_capacity(model.num_params());
        for (name, seg, _) in model.segments() {
            let values = doc
                .arrays
                .get(name)
                .ok_or_else(|| Error::invalid(format!("model document lacks `{name}`")))?;
            if values.len() != seg.len() {
                return Err(Error::DimensionMismatch {
                    expected: seg.len(),
                    found: values.len(),
                });
            }
            flat.extend_from_slice(values);
        }
        if doc.arrays.len() != model.segments().len() {
            return Err(Error::invalid("model document has unexpected arrays"));
        }
        model.set_flat_params(&flat)?;
        Ok(model)
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(&self.to_document())?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let doc: ModelDocument = serde_json::from_str(&text)?;
        Model::from_document(&doc)
    }
}

/// Serialized form: every parameter group is a flat array keyed by name
/// (`weights`, `bias` or `W1`, `b1`, `W2`, `b2`, `w_out`, `b_out`).
/// Matrices are row-major; scalars are one-element arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub family: ModelFamily,
    pub dim: usize,
    #[serde(flatten)]
    pub arrays: BTreeMap<String, Vec<f64>>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn linear_forward() {
        let m = Model::Linear(LinearModel {
            weights: vec![1.0, -1.0],
            bias: 0.5,
        });
        assert_eq!(m.forward(&[2.0, 1.0]).unwrap(), 1.5);
        let z = Model::init(ModelFamily::Linear, 3, 0);
        assert_eq!(z.forward(&[4.0, -2.0, 9.0]).unwrap(), 0.0);
        assert!(matches!(
            m.forward(&[1.0]),
            Err(Error::DimensionMismatch {
                expected: 2,
                found: 1
            })
        ));
    }

    #[test]
    fn zero_mlp_exposes_residual_path() {
        let mut mlp = ResidualMlp::zeros(3);
        let x = [0.5, -2.0, 1.5];
        assert_eq!(Model::ResidualMlp(mlp.clone()).forward(&x).unwrap(), 0.0);
        mlp.w_out = vec![1.0, 2.0, -1.0];
        assert_relative_eq!(
            Model::ResidualMlp(mlp).forward(&x).unwrap(),
            0.5 - 4.0 - 1.5
        );
    }

    #[test]
    fn linear_backward_is_input_and_scales() {
        let m = Model::Linear(LinearModel {
            weights: vec![0.3, 0.7],
            bias: -1.0,
        });
        let x = [2.0, -3.0];
        assert_eq!(m.backward(&x, 1.0).unwrap().values, vec![2.0, -3.0, 1.0]);
        assert_eq!(m.backward(&x, -2.5).unwrap().values, vec![-5.0, 7.5, -2.5]);
    }

    #[test]
    fn update_rule() {
        let mut m = Model::Linear(LinearModel {
            weights: vec![1.0],
            bias: 5.0,
        });
        let zero = m.zero_grad();
        let before = m.clone();
        m.apply_update(&zero, 0.1, 0.0).unwrap();
        assert_eq!(m, before);

        m.apply_update(&zero, 1.0, 0.5).unwrap();
        let Model::Linear(lin) = &m else {
            unreachable!()
        };
        assert_eq!(lin.weights, vec![0.0]);
        assert_eq!(lin.bias, 5.0);
    }

    #[test]
    fn non_finite_update_leaves_model_alone() {
        let mut m = Model::Linear(LinearModel {
            weights: vec![1.0],
            bias: 0.0,
        });
        let grad = GradientBuffer {
            values: vec![f64::INFINITY, 0.0],
        };
        let before = m.clone();
        assert!(matches!(
            m.apply_update(&grad, 0.1, 0.0),
            Err(Error::NonFiniteUpdate)
        ));
        assert_eq!(m, before);
    }

    #[test]
    fn mlp_init_is_seeded_and_bounded() {
        let a = ResidualMlp::init_uniform(4, 9);
        let b = ResidualMlp::init_uniform(4, 9);
        assert_eq!(a, b);
        assert!(a
            .w1
            .iter()
            .chain(&a.w2)
            .chain(&a.w_out)
            .all(|w| w.abs() <= 0.5));
        assert!(a.b1.iter().chain(&a.b2).all(|&b| b == 0.0));
        assert_ne!(a, ResidualMlp::init_uniform(4, 10));
    }

    #[test]
    fn penalty_skips_biases() {
        let m = Model::Linear(LinearModel {
            weights: vec![1.0, 2.0],
            bias: 10.0,
        });
        assert_eq!(m.penalty(0.5), 2.5);
    }

    #[test]
    fn document_round_trip() {
        let m = Model::ResidualMlp(ResidualMlp::init_uniform(3, 1));
        let doc = m.to_document();
        let json = serde_json::to_value(&doc).unwrap();
        for key in ["W1", "b1", "W2", "b2", "w_out", "b_out"] {
            assert!(json.get(key).is_some(), "{key}");
        }
        let back: ModelDocument = serde_json::from_value(json).unwrap();
        assert_eq!(Model::from_document(&back).unwrap(), m);

        let lin = Model::init(ModelFamily::Linear, 2, 0);
        let json = serde_json::to_value(lin.to_document()).unwrap();
        assert!(json.get("weights").is_some() && json.get("bias").is_some());
    }
}
