//! Experiment harness: splits, hyperparameter grids, paired significance
//! tests, resumable ledgers, corruption sweeps and CSV output.

pub mod config;
pub mod grid;
pub mod ledger;
pub mod matrix;
pub mod output;
pub mod protocol;
pub mod stats;
pub mod sweep;

pub use config::RunConfig;
pub use grid::{default_lambdas, k_grid, parse_methods, GridSpec, Method};
pub use ledger::{Ledger, LedgerEntry};
pub use matrix::{build_matrix, k_star_summary, ComparisonMatrix, KStarRow};
pub use output::{write_bench_outputs, write_sweep_outputs, ResultBlock};
pub use protocol::{
    evaluate_method, identity, prepare_split, run_protocol, run_protocol_with, DatasetResults,
    MethodResult, Partition, PreparedSplit, ProtocolConfig, SplitOutcome, DEFAULT_SPLITS,
};
pub use stats::{compare, PairedComparison, PRACTICAL_GAIN, SIGNIFICANCE_LEVEL};
pub use sweep::{simulate_sweep, Corruption, SweepRow, SWEEP_SPLITS};
