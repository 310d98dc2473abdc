//! Task-similarity routing at task start.

use serde::{Deserialize, Serialize};

use super::replay::ReplayBuffer;
use crate::stats::cosine;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoutingDecision {
    /// Most similar stored task, if any.
    pub source: Option<usize>,
    pub similarity: f64,
    /// Whether the new task reuses `source`'s neurons and starts with a
    /// halved block.
    pub reuse: bool,
}

impl RoutingDecision {
    pub const NONE: RoutingDecision = RoutingDecision {
        source: None,
        similarity: 0.0,
        reuse: false,
    };
}

pub fn route_by_similarity(buffer: &ReplayBuffer, new_mean: &[f64], threshold: f64) -> RoutingDecision {
    let mut best = RoutingDecision::NONE;
    for m in buffer.memories() {
        let s = cosine(&m.mean, new_mean);
        if best.source.is_none() || s > best.similarity {
            best = RoutingDecision {
                source: Some(m.task),
                similarity: s,
                reuse: false,
            };
        }
    }
    best.reuse = best.source.is_some() && best.similarity >= threshold;
    best
}
