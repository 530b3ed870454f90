//! Repeated-split evaluation: standardize on train, grid-search every method
//! on validation accuracy, report test accuracy of the selected model.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::{default_lambdas, GridSpec, Method};
use super::ledger::{Ledger, LedgerEntry};
use crate::data::{sample_split, LabeledDataset, SplitSpec, Standardizer};
use crate::error::{Error, Result};
use crate::loss::IndividualLoss;
use crate::model::{Model, ModelFamily};
use crate::optim::{accuracy, train, TrainConfig, DEFAULT_EPOCHS, DEFAULT_LEARNING_RATE};

pub const DEFAULT_SPLITS: usize = 25;

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolConfig {
    pub model_family: ModelFamily,
    pub loss: IndividualLoss,
    pub methods: Vec<Method>,
    pub seed_base: u64,
    pub splits: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub lambdas: Vec<f64>,
    /// Replaces the power-of-ten k grid when set.
    pub ks: Option<Vec<usize>>,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            model_family: ModelFamily::Linear,
            loss: IndividualLoss::Logistic,
            methods: Method::ALL.to_vec(),
            seed_base: 0,
            splits: DEFAULT_SPLITS,
            epochs: DEFAULT_EPOCHS,
            learning_rate: DEFAULT_LEARNING_RATE,
            lambdas: default_lambdas(),
            ks: None,
        }
    }
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::Config("no methods selected".into()));
        }
        if self.splits == 0 {
            return Err(Error::Config("split count must be positive".into()));
        }
        if self.methods.contains(&Method::CloseDecay) && !self.epochs.is_multiple_of(3) {
            return Err(Error::Config(
                "close_decay needs epochs divisible by 3".into(),
            ));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be positive".into()));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::Config(format!(
                "learning rate {} must be > 0",
                self.learning_rate
            )));
        }
        if self.lambdas.is_empty() || self.lambdas.iter().any(|l| !l.is_finite() || *l < 0.0) {
            return Err(Error::Config(
                "lambda grid must be non-empty and nonnegative".into(),
            ));
        }
        if let Some(ks) = &self.ks {
            if ks.is_empty() || ks.contains(&0) {
                return Err(Error::Config(
                    "k grid must be non-empty and positive".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn split_seed(&self, split: usize) -> u64 {
        self.seed_base.wrapping_add(split as u64)
    }

    fn train_config(&self, lambda: f64, seed: u64) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            learning_rate: self.learning_rate,
            lambda,
            seed,
        }
    }
}

/// Standardized train/validation/test views of one split.
#[derive(Debug, Clone)]
pub struct PreparedSplit {
    pub index: usize,
    pub seed: u64,
    pub train: LabeledDataset,
    pub valid: LabeledDataset,
    pub test: LabeledDataset,
}

/// Outcome of one method on one split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitOutcome {
    pub split: usize,
    pub method: Method,
    pub lambda: f64,
    pub k: Option<usize>,
    pub n_train: usize,
    pub train_accuracy: f64,
    pub valid_accuracy: f64,
    pub test_accuracy: f64,
    /// Grid points skipped because training diverged.
    pub diverged: usize,
}

/// Per-split results of one method on one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodResult {
    pub method: Method,
    pub outcomes: Vec<SplitOutcome>,
}

impl MethodResult {
    pub fn test_accuracies(&self) -> Vec<f64> {
        self.outcomes.iter().map(|o| o.test_accuracy).collect()
    }

    pub fn mean_test_accuracy(&self) -> f64 {
        mean(self.outcomes.iter().map(|o| o.test_accuracy))
    }

    pub fn mean_train_accuracy(&self) -> f64 {
        mean(self.outcomes.iter().map(|o| o.train_accuracy))
    }

    pub fn selected_lambdas(&self) -> Vec<f64> {
        self.outcomes.iter().map(|o| o.lambda).collect()
    }

    pub fn selected_ks(&self) -> Vec<Option<usize>> {
        self.outcomes.iter().map(|o| o.k).collect()
    }
}

pub(crate) fn mean(it: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = it.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    if count == 0 {
        f64::NAN
    } else {
        sum / count as f64
    }
}

/// All methods on one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetResults {
    pub dataset: String,
    pub n: usize,
    pub methods: Vec<MethodResult>,
}

impl DatasetResults {
    pub fn method(&self, m: Method) -> Option<&MethodResult> {
        self.methods.iter().find(|r| r.method == m)
    }
}

/// Splits `data`, corrupts the raw partitions with `corrupt`, and
/// standardizes all three with statistics from the (corrupted) train part.
pub fn prepare_split<F>(
    data: &LabeledDataset,
    config: &ProtocolConfig,
    split: usize,
    corrupt: &F,
) -> Result<PreparedSplit>
where
    F: Fn(Partition, &LabeledDataset, u64) -> Result<LabeledDataset> + Sync,
{
    let seed = config.split_seed(split);
    let idx = sample_split(data.len(), &SplitSpec::new(seed))?;
    let train_raw = corrupt(Partition::Train, &data.subset(&idx.train)?, seed)?;
    let valid_raw = corrupt(Partition::Valid, &data.subset(&idx.valid)?, seed)?;
    let test_raw = corrupt(Partition::Test, &data.subset(&idx.test)?, seed)?;
    let scaler = Standardizer::fit(&train_raw);
    Ok(PreparedSplit {
        index: split,
        seed,
        train: scaler.apply(&train_raw)?,
        valid: scaler.apply(&valid_raw)?,
        test: scaler.apply(&test_raw)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Partition {
    Train,
    Valid,
    Test,
}

/// No corruption.
pub fn identity(_: Partition, d: &LabeledDataset, _: u64) -> Result<LabeledDataset> {
    Ok(d.clone())
}

struct Candidate {
    lambda: f64,
    k: usize,
    valid_accuracy: f64,
    model: Model,
}

/// Grid-searches one method on one prepared split. Selection uses
/// validation accuracy only; ties go to the smaller λ, then the smaller k.
pub fn evaluate_method(
    split: &PreparedSplit,
    method: Method,
    config: &ProtocolConfig,
) -> Result<SplitOutcome> {
    let n = split.train.len();
    let grid = GridSpec::for_method(method, n, &config.lambdas, config.ks.as_deref());
    let candidates = grid.candidates();
    let ctx = |lambda: f64, k: usize| {
        format!(
            "split {}, method {method}, lambda {lambda:e}, k {k}",
            split.index
        )
    };

    let trained: Vec<Result<Option<Candidate>>> = candidates
        .par_iter()
        .map(|&(lambda, k)| {
            let init = Model::init(config.model_family, split.train.dim(), split.seed);
            match train(
                init,
                &split.train,
                config.loss,
                method.objective(k),
                &config.train_config(lambda, split.seed),
            ) {
                Ok(out) => Ok(Some(Candidate {
                    lambda,
                    k,
                    valid_accuracy: accuracy(&out.model, &split.valid)?,
                    model: out.model,
                })),
                Err(Error::Divergence { .. }) => Ok(None),
                Err(e) => Err(e.with_context(ctx(lambda, k))),
            }
        })
        .collect();

    let mut diverged = 0;
    let mut best: Option<Candidate> = None;
    for c in trained {
        match c? {
            None => diverged += 1,
            Some(c) => {
                if best
                    .as_ref()
                    .is_none_or(|b| c.valid_accuracy > b.valid_accuracy)
                {
                    best = Some(c);
                }
            }
        }
    }
    let best = best.ok_or_else(|| Error::Divergence {
        epoch: config.epochs,
        context: format!(
            " [every grid point diverged: split {}, method {method}]",
            split.index
        ),
    })?;
    Ok(SplitOutcome {
        split: split.index,
        method,
        lambda: best.lambda,
        k: method.uses_k().then_some(best.k),
        n_train: n,
        train_accuracy: accuracy(&best.model, &split.train)?,
        valid_accuracy: best.valid_accuracy,
        test_accuracy: accuracy(&best.model, &split.test)?,
        diverged,
    })
}

/// Runs the full protocol on one dataset.
pub fn run_protocol(data: &LabeledDataset, config: &ProtocolConfig) -> Result<DatasetResults> {
    run_protocol_with(data, config, &identity, None)
}

/// [`run_protocol`] with a per-partition corruption and an optional resume ledger.
pub fn run_protocol_with<F>(
    data: &LabeledDataset,
    config: &ProtocolConfig,
    corrupt: &F,
    ledger: Option<&Ledger>,
) -> Result<DatasetResults>
where
    F: Fn(Partition, &LabeledDataset, u64) -> Result<LabeledDataset> + Sync,
{
    config.validate()?;
    let work: Vec<(usize, Method)> = (0..config.splits)
        .flat_map(|s| config.methods.iter().map(move |&m| (s, m)))
        .collect();
    let pending_splits: Vec<usize> = (0..config.splits)
        .filter(|&s| {
            config
                .methods
                .iter()
                .any(|&m| ledger.is_none_or(|l| l.get(&data.name, s, m).is_none()))
        })
        .collect();
    let prepared: Vec<Option<PreparedSplit>> = (0..config.splits)
        .into_par_iter()
        .map(|s| {
            if pending_splits.contains(&s) {
                prepare_split(data, config, s, corrupt).map(Some)
            } else {
                Ok(None)
            }
        })
        .collect::<Result<_>>()?;

    let outcomes: Vec<SplitOutcome> = work
        .par_iter()
        .map(|&(s, m)| {
            if let Some(done) = ledger.and_then(|l| l.get(&data.name, s, m)) {
                return Ok(done.outcome);
            }
            let split = prepared[s].as_ref().expect("pending split prepared");
            let outcome = evaluate_method(split, m, config)?;
            if let Some(l) = ledger {
                l.record(LedgerEntry {
                    dataset: data.name.clone(),
                    outcome: outcome.clone(),
                })?;
            }
            Ok(outcome)
        })
        .collect::<Result<_>>()?;

    let methods = config
        .methods
        .iter()
        .map(|&m| MethodResult {
            method: m,
            outcomes: outcomes.iter().filter(|o| o.method == m).cloned().collect(),
        })
        .collect();
    Ok(DatasetResults {
        dataset: data.name.clone(),
        n: data.len(),
        methods,
    })
}
