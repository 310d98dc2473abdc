//! Experiment orchestration: the ablation registry, per-task training, the
//! resumable matrix runner and aggregation.

mod aggregate;
mod learner;
mod matrix;
mod registry;

pub use aggregate::{aggregate, aggregate_table, Aggregate};
pub use learner::{
    config_hash, run_cell, EarlyStopping, Events, Learner, Preset, RunResult, RunSettings, Split, TaskLog,
};
pub use matrix::{
    cells, load_failures, load_results, run_matrix, write_atomic, Cell, CellFailure, CellOutcome, MatrixSummary,
};
pub use registry::{config, flags_for, registry, CONFIG_NAMES};
