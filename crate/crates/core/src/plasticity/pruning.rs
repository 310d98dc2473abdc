//! Post-task synapse pruning with stochastic regeneration.

use serde::{Deserialize, Serialize};

use super::config::Hyper;
use crate::error::Result;
use crate::net::GrowableNet;
use crate::rng::Stream;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PruneReport {
    pub pruned: usize,
    pub regenerated: usize,
}

/// Zeroes incoming weights with `|w| < τ_p` on the task's unfrozen neurons;
/// each zeroed entry is redrawn from `N(0, regen_std²)` with probability `p_r`.
pub fn prune_and_regenerate(
    net: &mut GrowableNet,
    task: usize,
    hyper: &Hyper,
    rng: &mut Stream,
) -> Result<PruneReport> {
    net.task(task)?;
    let mut report = PruneReport::default();
    for i in net.support(task) {
        if net.is_frozen(i) {
            continue;
        }
        for w in net.params.row_mut(i) {
            if w.abs() < hyper.prune_threshold {
                *w = 0.0;
                report.pruned += 1;
                if rng.bernoulli(hyper.regen_prob) {
                    *w = hyper.regen_std * rng.normal();
                    report.regenerated += 1;
                }
            }
        }
    }
    Ok(report)
}
