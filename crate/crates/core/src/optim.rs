//! Full-batch gradient descent over a (model, individual loss, aggregate) triple,
//! including the three-phase decaying-k schedule for close-k.

use std::fmt;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::loss::{AggregateLoss, IndividualLoss, LossReport};
use crate::model::{GradientBuffer, Model};

pub const DEFAULT_EPOCHS: usize = 300;
pub const DEFAULT_LEARNING_RATE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub lambda: f64,
    /// Seeds the MLP initialization.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: DEFAULT_EPOCHS,
            learning_rate: DEFAULT_LEARNING_RATE,
            lambda: 0.0,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self, objective: &Objective) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::invalid("epochs must be positive"));
        }
        if matches!(objective, Objective::CloseDecay { .. }) && !self.epochs.is_multiple_of(3) {
            return Err(Error::invalid(format!(
                "close-decay needs a positive multiple of 3 epochs, got {}",
                self.epochs
            )));
        }
        if !self.learning_rate.is_finite() || self.learning_rate < 0.0 {
            return Err(Error::invalid(format!(
                "bad learning rate {}",
                self.learning_rate
            )));
        }
        if !self.lambda.is_finite() || self.lambda < 0.0 {
            return Err(Error::invalid(format!("bad lambda {}", self.lambda)));
        }
        Ok(())
    }
}

/// What a training run minimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Objective {
    Fixed(AggregateLoss),
    /// Close-k with `k` following [`schedule_k`] down to `k_star`.
    CloseDecay {
        k_star: usize,
    },
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Objective::Fixed(AggregateLoss::Average) => write!(f, "average"),
            Objective::Fixed(AggregateLoss::TopK(k)) => write!(f, "top(k={k})"),
            Objective::Fixed(AggregateLoss::AverageTopK(k)) => write!(f, "atk(k={k})"),
            Objective::Fixed(AggregateLoss::CloseK(k)) => write!(f, "close(k={k})"),
            Objective::CloseDecay { k_star } => write!(f, "close_decay(k*={k_star})"),
        }
    }
}

impl Objective {
    /// The aggregate used at 1-based epoch `i` for a batch of `n` examples.
    pub fn aggregate_at(&self, i: usize, epochs: usize, n: usize) -> Result<AggregateLoss> {
        match *self {
            Objective::Fixed(spec) => Ok(spec),
            Objective::CloseDecay { k_star } => {
                Ok(AggregateLoss::CloseK(schedule_k(i, epochs, n, k_star)?))
            }
        }
    }
}

/// `k` for 1-based epoch `i`: `n` for the first third of the epochs, a
/// linear interpolation `k* + round((n − k*)(2·epochs − 3i)/epochs)` for the
/// middle third, and `k*` afterwards.
pub fn schedule_k(i: usize, epochs: usize, n: usize, k_star: usize) -> Result<usize> {
    if k_star == 0 || k_star > n {
        return Err(Error::invalid(format!("k* = {k_star} outside [1, {n}]")));
    }
    if i == 0 || i > epochs {
        return Err(Error::invalid(format!("epoch {i} outside [1, {epochs}]")));
    }
    if 3 * i < epochs {
        return Ok(n);
    }
    if 3 * i >= 2 * epochs {
        return Ok(k_star);
    }
    // round half up in integers: (2·num + den) / (2·den)
    let num = (n - k_star) as u128 * (2 * epochs - 3 * i) as u128;
    let den = epochs as u128;
    let step = ((2 * num + den) / (2 * den)) as usize;
    Ok((k_star + step).clamp(k_star, n))
}

/// One row per epoch, measured before that epoch's update.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub epoch: usize,
    pub k: usize,
    pub aggregate_loss: f64,
    /// `aggregate_loss + λ‖weights‖²`.
    pub objective: f64,
    pub train_01_error: f64,
    /// The close-k constant in effect for this epoch, if any.
    pub big_m: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: Model,
    pub trace: Vec<TraceRow>,
}

/// Number of examples with `y · score <= 0`.
pub fn zero_one_errors(model: &Model, data: &LabeledDataset) -> Result<usize> {
    let mut errors = 0;
    for (x, &y) in data.rows().zip(data.labels()) {
        if y * model.forward(x)? <= 0.0 {
            errors += 1;
        }
    }
    Ok(errors)
}

pub fn accuracy(model: &Model, data: &LabeledDataset) -> Result<f64> {
    Ok(1.0 - zero_one_errors(model, data)? as f64 / data.len() as f64)
}

fn accumulate_aggregate_grad(
    model: &Model,
    data: &LabeledDataset,
    loss: IndividualLoss,
    report: &LossReport,
    scores: &[f64],
    grad: &mut GradientBuffer,
) -> Result<()> {
    for &i in &report.selected {
        let upstream = report.weights[i] * loss.derivative(data.label(i), scores[i])?;
        model.accumulate_grad(data.row(i), upstream, grad)?;
    }
    Ok(())
}

/// Evaluates `spec` on the model's losses and returns the report with the
/// gradient of `report.value` with respect to the flat parameters. For
/// close-k the selection and `M` are held fixed.
pub fn aggregate_gradient(
    model: &Model,
    data: &LabeledDataset,
    loss: IndividualLoss,
    spec: AggregateLoss,
) -> Result<(LossReport, GradientBuffer)> {
    let scores = data
        .rows()
        .map(|x| model.forward(x))
        .collect::<Result<Vec<_>>>()?;
    let losses = scores
        .iter()
        .zip(data.labels())
        .map(|(&s, &y)| loss.value(y, s))
        .collect::<Result<Vec<_>>>()?;
    let report = spec.evaluate(&losses, loss.threshold())?;
    let mut grad = model.zero_grad();
    accumulate_aggregate_grad(model, data, loss, &report, &scores, &mut grad)?;
    Ok((report, grad))
}

/// Trains `model` in place for `config.epochs` full-batch steps.
///
/// Each step scores every example, asks the aggregate for its gradient mask,
/// and accumulates the masked per-example gradients. Close-k steps use the
/// mean over the selected examples, so the `k = n` phase of close-decay is the
/// plain average loss step.
pub fn train(
    mut model: Model,
    data: &LabeledDataset,
    loss: IndividualLoss,
    objective: Objective,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate(&objective)?;
    if data.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: data.dim(),
        });
    }
    let n = data.len();
    let threshold = loss.threshold();
    let mut trace = Vec::with_capacity(config.epochs);
    let mut grad = model.zero_grad();
    let mut scores = vec![0.0; n];
    let mut losses = vec![0.0; n];

    for epoch in 1..=config.epochs {
        let diverged = || Error::Divergence {
            epoch,
            context: String::new(),
        };
        for (i, x) in data.rows().enumerate() {
            scores[i] = model.forward(x).map_err(|_| diverged())?;
            losses[i] = loss
                .value(data.label(i), scores[i])
                .map_err(|_| diverged())?;
        }
        let spec = objective.aggregate_at(epoch, config.epochs, n)?;
        let report = spec.evaluate(&losses, threshold)?;
        if !report.value.is_finite() {
            return Err(diverged());
        }
        let wrong = scores
            .iter()
            .zip(data.labels())
            .filter(|(s, y)| **s * **y <= 0.0)
            .count();
        trace.push(TraceRow {
            epoch,
            k: spec.k().unwrap_or(n),
            aggregate_loss: report.value,
            objective: report.value + model.penalty(config.lambda),
            train_01_error: wrong as f64 / n as f64,
            big_m: report.big_m,
        });

        let scale = match spec {
            AggregateLoss::CloseK(_) => 1.0 / report.selected.len() as f64,
            _ => 1.0,
        };
        grad.zero();
        accumulate_aggregate_grad(&model, data, loss, &report, &scores, &mut grad)?;
        grad.scale(scale);
        model
            .apply_update(&grad, config.learning_rate, config.lambda)
            .map_err(|e| match e {
                Error::NonFiniteUpdate => diverged(),
                other => other,
            })?;
    }
    Ok(TrainOutcome { model, trace })
}

/// Writes `epoch,k,aggregate_loss,train_01_error`.
pub fn write_trace_csv(trace: &[TraceRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out =
        std::io::BufWriter::new(std::fs::File::create(path).map_err(|e| Error::io(path, e))?);
    let mut body = String::from("epoch,k,aggregate_loss,train_01_error\n");
    for r in trace {
        body.push_str(&format!(
            "{},{},{},{}\n",
            r.epoch, r.k, r.aggregate_loss, r.train_01_error
        ));
    }
    out.write_all(body.as_bytes())
        .map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}
