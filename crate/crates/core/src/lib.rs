//! Modular plasticity continual-learning system: a growable flat network with
//! switchable plasticity mechanisms, benchmark generators, metrics, Pareto
//! analysis and an ablation runner.

pub mod bench;
pub mod error;
pub mod metrics;
pub mod net;
pub mod pareto;
pub mod plasticity;
pub mod rng;
pub mod runner;
pub mod stats;

pub use error::{Error, Result};
