//! Close-k aggregate loss for binary classification.
//!
//! The crate provides the individual surrogate losses (logistic, hinge), the
//! aggregate losses that combine them (average, top-k, average top-k,
//! close-k), linear and residual-MLP scorers, a full-batch trainer with the
//! decaying-k schedule, synthetic datasets and corruptions, and the
//! split/grid-search/significance harness used to compare aggregates.

pub mod data;
pub mod error;
pub mod harness;
pub mod loss;
pub mod model;
pub mod optim;

pub use data::LabeledDataset;
pub use error::{DatasetError, Error, Result};
pub use harness::{Method, ProtocolConfig, RunConfig};
pub use loss::{AggregateLoss, IndividualLoss, LossReport};
pub use model::{GradientBuffer, Model, ModelFamily};
pub use optim::{
    aggregate_gradient, schedule_k, train, Objective, TraceRow, TrainConfig, TrainOutcome,
};
