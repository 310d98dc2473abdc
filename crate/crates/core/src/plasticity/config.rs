use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EwcMode {
    Off,
    /// One Fisher accumulator over every parameter.
    Global,
    /// One accumulator, each task's contribution masked to its own subspace.
    Topo,
    /// One masked Fisher tensor per task, summed at penalty time.
    TopoPertask,
}

/// The nine switchable mechanisms. Replay carries mixed consolidation and
/// gating carries the context vectors, matching the nine flag columns of the
/// ablation table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mechanism {
    Fourier,
    Ewc,
    Replay,
    Gating,
    Importance,
    Pruning,
    Hebbian,
    Similarity,
    AdaptiveGrowth,
}

impl Mechanism {
    pub const ALL: [Mechanism; 9] = [
        Mechanism::Fourier,
        Mechanism::Ewc,
        Mechanism::Replay,
        Mechanism::Gating,
        Mechanism::Importance,
        Mechanism::Pruning,
        Mechanism::Hebbian,
        Mechanism::Similarity,
        Mechanism::AdaptiveGrowth,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mechanism::Fourier => "fourier",
            Mechanism::Ewc => "ewc",
            Mechanism::Replay => "replay",
            Mechanism::Gating => "gating",
            Mechanism::Importance => "importance",
            Mechanism::Pruning => "pruning",
            Mechanism::Hebbian => "hebbian",
            Mechanism::Similarity => "similarity",
            Mechanism::AdaptiveGrowth => "adaptive_growth",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Flags {
    pub use_fourier: bool,
    pub use_ewc: EwcMode,
    pub use_replay: bool,
    pub use_gating: bool,
    pub use_continuous_importance: bool,
    pub use_pruning: bool,
    pub use_hebbian: bool,
    pub use_similarity: bool,
    pub use_adaptive_growth: bool,
}

impl Flags {
    pub fn all_on() -> Self {
        Self {
            use_fourier: true,
            use_ewc: EwcMode::Global,
            use_replay: true,
            use_gating: true,
            use_continuous_importance: true,
            use_pruning: true,
            use_hebbian: true,
            use_similarity: true,
            use_adaptive_growth: true,
        }
    }

    pub fn all_off() -> Self {
        Self {
            use_fourier: false,
            use_ewc: EwcMode::Off,
            use_replay: false,
            use_gating: false,
            use_continuous_importance: false,
            use_pruning: false,
            use_hebbian: false,
            use_similarity: false,
            use_adaptive_growth: false,
        }
    }

    pub fn enabled(&self, m: Mechanism) -> bool {
        match m {
            Mechanism::Fourier => self.use_fourier,
            Mechanism::Ewc => self.use_ewc != EwcMode::Off,
            Mechanism::Replay => self.use_replay,
            Mechanism::Gating => self.use_gating,
            Mechanism::Importance => self.use_continuous_importance,
            Mechanism::Pruning => self.use_pruning,
            Mechanism::Hebbian => self.use_hebbian,
            Mechanism::Similarity => self.use_similarity,
            Mechanism::AdaptiveGrowth => self.use_adaptive_growth,
        }
    }

    /// Turns a mechanism off (EWC goes to [`EwcMode::Off`]).
    pub fn without(mut self, m: Mechanism) -> Self {
        match m {
            Mechanism::Fourier => self.use_fourier = false,
            Mechanism::Ewc => self.use_ewc = EwcMode::Off,
            Mechanism::Replay => self.use_replay = false,
            Mechanism::Gating => self.use_gating = false,
            Mechanism::Importance => self.use_continuous_importance = false,
            Mechanism::Pruning => self.use_pruning = false,
            Mechanism::Hebbian => self.use_hebbian = false,
            Mechanism::Similarity => self.use_similarity = false,
            Mechanism::AdaptiveGrowth => self.use_adaptive_growth = false,
        }
        self
    }

    /// Mechanisms enabled in `reference` but not here.
    pub fn removed_relative_to(&self, reference: &Flags) -> Vec<Mechanism> {
        Mechanism::ALL
            .into_iter()
            .filter(|&m| reference.enabled(m) && !self.enabled(m))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthParams {
    /// Loss EMA decay `β`.
    pub ema_decay: f64,
    /// Relative band the EMA must clear below its reference.
    pub band: f64,
    /// Consecutive stagnating epochs that trigger growth.
    pub window: usize,
    pub block: usize,
    pub cooldown: usize,
    pub warmup: usize,
    /// Period of unowned growth when the adaptive trigger is off.
    pub interval: usize,
    /// Owned neurons allocated at the start of every task.
    pub start_block: usize,
    /// Std of new incoming weights.
    pub init_scale: f64,
}

impl Default for GrowthParams {
    fn default() -> Self {
        Self {
            ema_decay: 0.99,
            band: 0.02,
            window: 50,
            block: 8,
            cooldown: 100,
            warmup: 100,
            interval: 250,
            start_block: 16,
            init_scale: 0.25,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyper {
    /// Importance EMA rate.
    pub alpha: f64,
    /// Activity threshold for the importance indicator.
    pub tau: f64,
    pub prune_threshold: f64,
    pub regen_prob: f64,
    pub regen_std: f64,
    pub lambda_ewc: f64,
    pub replay_ratio: f64,
    pub replay_weight: f64,
    pub replay_batch: usize,
    pub replay_capacity: usize,
    pub hebb_rate: f64,
    pub sim_threshold: f64,
    /// Activation multiplier for neurons owned by other tasks under gating.
    pub suppression: f64,
    pub learning_rate: f64,
    pub growth: GrowthParams,
}

impl Default for Hyper {
    fn default() -> Self {
        Self {
            alpha: 0.01,
            tau: 1e-4,
            prune_threshold: 0.05,
            regen_prob: 0.02,
            regen_std: 0.01,
            lambda_ewc: 100.0,
            replay_ratio: 0.3,
            replay_weight: 0.5,
            replay_batch: 32,
            replay_capacity: 32,
            hebb_rate: 1e-4,
            sim_threshold: 0.9,
            suppression: 0.1,
            learning_rate: 1e-2,
            growth: GrowthParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MechanismConfig {
    pub name: String,
    pub flags: Flags,
    pub hyper: Hyper,
}

impl MechanismConfig {
    pub fn new(name: impl Into<String>, flags: Flags) -> Self {
        Self {
            name: name.into(),
            flags,
            hyper: Hyper::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let h = &self.hyper;
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if h.prune_threshold.is_nan() || h.prune_threshold <= 0.0 {
            return bad("prune threshold must be positive");
        }
        if !(0.0..=1.0).contains(&h.regen_prob) {
            return bad("regeneration probability must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&h.replay_ratio) {
            return bad("replay ratio must lie in [0, 1]");
        }
        if !(h.alpha > 0.0 && h.alpha < 1.0) {
            return bad("importance rate must lie in (0, 1)");
        }
        if h.growth.block == 0 || h.growth.start_block == 0 {
            return bad("growth blocks must be non-empty");
        }
        if h.growth.interval == 0 {
            return bad("growth interval must be positive");
        }
        Ok(())
    }
}
