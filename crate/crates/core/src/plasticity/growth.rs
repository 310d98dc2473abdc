//! Neurogenesis control: EMA-stagnation growth into the current task, or
//! fixed-interval growth into the shared pool.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::config::GrowthParams;
use crate::error::Result;
use crate::net::GrowableNet;
use crate::rng::Stream;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrowthDecision {
    Hold,
    /// Grow `count` neurons owned by the current task.
    Owned(usize),
    /// Grow `count` neurons owned by no task.
    Unowned(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthController {
    params: GrowthParams,
    adaptive: bool,
    ema: Option<f64>,
    best_ema: f64,
    stagnant: usize,
    since_growth: usize,
    epoch: usize,
    total_epochs: usize,
    events: usize,
}

impl GrowthController {
    pub fn new(params: GrowthParams, adaptive: bool) -> Self {
        Self {
            params,
            adaptive,
            ema: None,
            best_ema: f64::INFINITY,
            stagnant: 0,
            since_growth: 0,
            epoch: 0,
            total_epochs: 0,
            events: 0,
        }
    }

    /// Resets the per-task trigger state; the run-wide epoch clock used by
    /// interval growth keeps counting.
    pub fn begin_task(&mut self) {
        self.ema = None;
        self.best_ema = f64::INFINITY;
        self.stagnant = 0;
        self.since_growth = 0;
        self.epoch = 0;
    }

    pub fn ema(&self) -> Option<f64> {
        self.ema
    }

    pub fn events(&self) -> usize {
        self.events
    }

    /// Feeds one epoch's mean training loss and decides whether to grow.
    pub fn observe(&mut self, loss: f64) -> GrowthDecision {
        let p = &self.params;
        let ema = match self.ema {
            None => loss,
            Some(prev) => p.ema_decay * prev + (1.0 - p.ema_decay) * loss,
        };
        self.ema = Some(ema);
        if self.epoch == 0 || ema < self.best_ema * (1.0 - p.band) {
            self.best_ema = ema;
            self.stagnant = 0;
        } else {
            self.stagnant += 1;
        }
        self.since_growth += 1;
        let epoch = self.epoch;
        self.epoch += 1;
        self.total_epochs += 1;

        let decision = if self.adaptive {
            if epoch > p.warmup && self.since_growth > p.cooldown && self.stagnant >= p.window {
                self.stagnant = 0;
                GrowthDecision::Owned(p.block)
            } else {
                GrowthDecision::Hold
            }
        } else if self.total_epochs.is_multiple_of(p.interval) {
            GrowthDecision::Unowned(p.block)
        } else {
            GrowthDecision::Hold
        };
        if decision != GrowthDecision::Hold {
            self.since_growth = 0;
            self.events += 1;
        }
        decision
    }
}

/// Consults the controller and applies any growth to `net`.
pub fn maybe_grow(
    controller: &mut GrowthController,
    loss: f64,
    net: &mut GrowableNet,
    task: usize,
    rng: &mut Stream,
) -> Result<Option<Range<usize>>> {
    let init = controller.params.init_scale;
    match controller.observe(loss) {
        GrowthDecision::Hold => Ok(None),
        GrowthDecision::Owned(k) => net.grow(k, Some(task), init, rng).map(Some),
        GrowthDecision::Unowned(k) => net.grow(k, None, init, rng).map(Some),
    }
}
