//! Per-run training state and the per-task training loop.

use std::collections::BTreeSet;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bench::{generate_track, task_similarity_matrix, BenchParams, TaskDataset, Track, TrackSpec, INPUT_DIM};
use crate::error::{Error, Result};
use crate::metrics::{self, EvalSet, MetricRecord};
use crate::net::{Adam, FourierEncoder, GrowableNet, InputPath, LossKind};
use crate::plasticity::{
    apply_freeze_scaling, freeze_task, hebbian_update, maybe_grow, prune_and_regenerate, replay_step,
    route_by_similarity, update_importance, EwcMode, FisherStore, GrowthController, Mechanism, MechanismConfig,
    ReplayBuffer, RoutingDecision,
};
use crate::rng::Stream;
use crate::stats::column_mean;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Desk,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub max_epochs: usize,
    pub patience: usize,
    /// Smallest decrease of the epoch loss that counts as an improvement.
    pub min_delta: f64,
    pub batch_size: usize,
    pub fourier_features: usize,
    pub fourier_scale: f64,
    pub bench: BenchParams,
}

impl RunSettings {
    pub fn preset(preset: Preset) -> Self {
        let (max_epochs, patience) = match preset {
            Preset::Desk => (400, 60),
            Preset::Full => (2000, 300),
        };
        Self {
            max_epochs,
            patience,
            min_delta: 1e-4,
            batch_size: 32,
            fourier_features: 32,
            fourier_scale: 2.0,
            bench: BenchParams::default(),
        }
    }
}

impl Default for RunSettings {
    fn default() -> Self {
        Self::preset(Preset::Desk)
    }
}

/// Stops once the loss has not improved by more than `min_delta` for
/// `patience` consecutive epochs.
#[derive(Debug, Clone, PartialEq)]
pub struct EarlyStopping {
    patience: usize,
    min_delta: f64,
    best: f64,
    since_best: usize,
}

impl EarlyStopping {
    pub fn new(patience: usize, min_delta: f64) -> Self {
        Self {
            patience,
            min_delta,
            best: f64::INFINITY,
            since_best: 0,
        }
    }

    /// Returns `true` when training should stop after this epoch.
    pub fn observe(&mut self, loss: f64) -> bool {
        if loss < self.best - self.min_delta {
            self.best = loss;
            self.since_best = 0;
        } else {
            self.since_best += 1;
        }
        self.since_best >= self.patience
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Events {
    pub growth: usize,
    pub pruned: usize,
    pub regenerated: usize,
    pub replay_steps: usize,
    pub frozen: usize,
}

impl Events {
    fn add(&mut self, other: &Events) {
        self.growth += other.growth;
        self.pruned += other.pruned;
        self.regenerated += other.regenerated;
        self.replay_steps += other.replay_steps;
        self.frozen += other.frozen;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskLog {
    pub task: usize,
    pub kind: LossKind,
    pub epochs: usize,
    pub final_loss: f64,
    /// Test perf measured right after this task finished training.
    pub perf_after_training: f64,
    pub events: Events,
    pub routed_from: Option<usize>,
    pub similarity: f64,
    pub hidden_after: usize,
}

/// Encoded inputs and targets of one split.
pub type Split = (Vec<Vec<f64>>, Vec<Vec<f64>>);

type EpochObserver = Box<dyn FnMut(&GrowableNet, usize, usize) + Send>;

/// The state of one run: network, optimizer and every mechanism's memory.
pub struct Learner {
    config: MechanismConfig,
    settings: RunSettings,
    seed: u64,
    excised: BTreeSet<Mechanism>,
    input: InputPath,
    net: GrowableNet,
    adam: Adam,
    fisher: FisherStore,
    buffer: ReplayBuffer,
    growth: GrowthController,
    log: Vec<TaskLog>,
    observer: Option<EpochObserver>,
}

impl Learner {
    pub fn new(config: MechanismConfig, settings: RunSettings, seed: u64) -> Result<Self> {
        Self::with_excised(config, settings, seed, BTreeSet::new())
    }

    /// A learner in which the listed mechanisms are absent regardless of
    /// their flags.
    pub fn with_excised(
        config: MechanismConfig,
        settings: RunSettings,
        seed: u64,
        excised: BTreeSet<Mechanism>,
    ) -> Result<Self> {
        config.validate()?;
        if settings.batch_size == 0 || settings.max_epochs == 0 {
            return Err(Error::InvalidConfig(
                "batch size and epoch budget must be positive".into(),
            ));
        }
        let active = |m: Mechanism| config.flags.enabled(m) && !excised.contains(&m);
        let width = 2 * settings.fourier_features;
        let input = if active(Mechanism::Fourier) {
            InputPath::Fourier(FourierEncoder::new(
                seed,
                INPUT_DIM,
                settings.fourier_features,
                settings.fourier_scale,
            ))
        } else {
            InputPath::Raw { width }
        };
        let ewc = if active(Mechanism::Ewc) {
            config.flags.use_ewc
        } else {
            EwcMode::Off
        };
        let h = &config.hyper;
        Ok(Self {
            net: GrowableNet::new(width),
            adam: Adam::new(h.learning_rate),
            fisher: FisherStore::new(ewc),
            buffer: ReplayBuffer::new(h.replay_capacity),
            growth: GrowthController::new(h.growth, active(Mechanism::AdaptiveGrowth)),
            config,
            settings,
            seed,
            excised,
            input,
            log: Vec::new(),
            observer: None,
        })
    }

    /// Whether a mechanism runs: its flag is on and it has not been excised.
    pub fn active(&self, m: Mechanism) -> bool {
        self.config.flags.enabled(m) && !self.excised.contains(&m)
    }

    /// Called after every epoch with `(net, task, epoch)`.
    pub fn set_epoch_observer(&mut self, f: impl FnMut(&GrowableNet, usize, usize) + Send + 'static) {
        self.observer = Some(Box::new(f));
    }

    pub fn net(&self) -> &GrowableNet {
        &self.net
    }

    pub fn input(&self) -> &InputPath {
        &self.input
    }

    pub fn fisher(&self) -> &FisherStore {
        &self.fisher
    }

    pub fn buffer(&self) -> &ReplayBuffer {
        &self.buffer
    }

    pub fn log(&self) -> &[TaskLog] {
        &self.log
    }

    pub fn config(&self) -> &MechanismConfig {
        &self.config
    }

    fn gating(&self) -> bool {
        self.active(Mechanism::Gating)
    }

    fn stream(&self, label: &str, task: usize) -> Stream {
        Stream::new(self.seed, &format!("{label}/task{task}"))
    }

    /// Trains the next task to completion, including the post-task steps.
    pub fn train_task(&mut self, ds: &TaskDataset) -> Result<TaskLog> {
        let (raw_x, ys) = ds.train_split();
        if raw_x.is_empty() {
            return Err(Error::EmptyDataset(ds.task));
        }
        let xs = self.input.encode_all(&raw_x)?;
        let h = self.config.hyper;
        let gating = self.gating();
        let keep_memory = self.active(Mechanism::Replay) || self.active(Mechanism::Similarity);

        let task = self.net.add_task(ds.kind, ds.output_dim());
        let routing = if self.active(Mechanism::Similarity) && !self.buffer.is_empty() {
            route_by_similarity(&self.buffer, &column_mean(&xs), h.sim_threshold)
        } else {
            RoutingDecision::NONE
        };
        let mut start = h.growth.start_block;
        if routing.reuse {
            if let Some(src) = routing.source {
                self.net.add_read(task, src)?;
                start = (start / 2).max(1);
            }
        }
        let mut init_rng = self.stream("init", task);
        self.net.grow(start, Some(task), h.growth.init_scale, &mut init_rng)?;
        self.adam.reset();
        self.growth.begin_task();

        let mut events = Events::default();
        let mut batch_rng = self.stream("minibatch", task);
        let mut replay_rng = self.stream("replay", task);
        let mut growth_rng = self.stream("growth", task);
        let mut stopper = EarlyStopping::new(self.settings.patience, self.settings.min_delta);
        let mut order: Vec<usize> = (0..xs.len()).collect();
        let mut epochs = 0;
        let mut final_loss = f64::NAN;

        for epoch in 0..self.settings.max_epochs {
            batch_rng.shuffle(&mut order);
            let mut total = 0.0;
            for chunk in order.chunks(self.settings.batch_size) {
                let bx: Vec<&[f64]> = chunk.iter().map(|&i| xs[i].as_slice()).collect();
                let by: Vec<&[f64]> = chunk.iter().map(|&i| ys[i].as_slice()).collect();
                let mut grads = self.net.params.zeros_like();
                let (loss, traces) = self.net.batch_gradient(&bx, &by, task, gating, &mut grads)?;
                total += loss * chunk.len() as f64;
                if let Some(p) = self.fisher.penalty_grad(&self.net, h.lambda_ewc) {
                    grads.add_scaled(&p, 1.0);
                }
                if self.active(Mechanism::Replay) {
                    if let Some(r) = replay_step(&self.net, &self.buffer, task, &h, gating, &mut replay_rng)? {
                        grads.add_scaled(&r, 1.0);
                        events.replay_steps += 1;
                    }
                }
                let continuous = self.active(Mechanism::Importance);
                apply_freeze_scaling(&mut grads, self.net.importance(), continuous);
                let frozen = self.net.frozen_rows();
                self.adam.step(&mut self.net.params, &grads, &frozen);
                if self.active(Mechanism::Hebbian) {
                    hebbian_update(&mut self.net, &traces, task, h.hebb_rate)?;
                }
                if continuous {
                    let n = self.net.hidden();
                    let mut activity = vec![0.0; n];
                    for t in &traces {
                        for (a, v) in activity.iter_mut().zip(&t.hidden) {
                            *a += v.abs();
                        }
                    }
                    activity.iter_mut().for_each(|a| *a /= traces.len() as f64);
                    update_importance(self.net.importance_mut(), &activity, h.alpha, h.tau);
                }
            }
            let loss = total / xs.len() as f64;
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss { task, epoch });
            }
            epochs = epoch + 1;
            final_loss = loss;
            if maybe_grow(&mut self.growth, loss, &mut self.net, task, &mut growth_rng)?.is_some() {
                events.growth += 1;
            }
            if let Some(obs) = self.observer.as_mut() {
                obs(&self.net, task, epoch);
            }
            if stopper.observe(loss) {
                break;
            }
        }

        if self.active(Mechanism::Pruning) {
            let mut rng = self.stream("prune", task);
            let report = prune_and_regenerate(&mut self.net, task, &h, &mut rng)?;
            events.pruned = report.pruned;
            events.regenerated = report.regenerated;
        }
        if self.fisher.mode() != EwcMode::Off {
            self.fisher.compute_fisher(&self.net, &xs, &ys, task, gating)?;
        }
        if keep_memory {
            let mut rng = self.stream("memory", task);
            self.buffer.insert(task, ds.kind, &xs, &ys, &mut rng);
        }
        events.frozen = freeze_task(&mut self.net, task)?;
        let (tx, ty) = ds.test_split();
        let tx = self.input.encode_all(&tx)?;
        let perf_after_training = metrics::evaluate(
            &self.net,
            &[EvalSet {
                task,
                inputs: &tx,
                targets: &ty,
            }],
            gating,
        )?[0];
        let log = TaskLog {
            task,
            kind: ds.kind,
            epochs,
            final_loss,
            perf_after_training,
            events,
            routed_from: routing.reuse.then_some(routing.source).flatten(),
            similarity: routing.similarity,
            hidden_after: self.net.hidden(),
        };
        self.log.push(log.clone());
        Ok(log)
    }

    /// Encoded test splits of `tasks`, aligned with the net's task ids.
    pub fn encode_tests(&self, tasks: &[TaskDataset]) -> Result<Vec<Split>> {
        tasks
            .iter()
            .map(|t| {
                let (x, y) = t.test_split();
                Ok((self.input.encode_all(&x)?, y))
            })
            .collect()
    }

    /// Perf per task, RD and GCR of the current network on the test splits.
    pub fn evaluate(&self, tasks: &[TaskDataset]) -> Result<(Vec<f64>, f64, f64)> {
        let encoded = self.encode_tests(tasks)?;
        let sets: Vec<EvalSet<'_>> = encoded
            .iter()
            .enumerate()
            .map(|(task, (x, y))| EvalSet {
                task,
                inputs: x,
                targets: y,
            })
            .collect();
        let gating = self.gating();
        let perf = metrics::evaluate(&self.net, &sets, gating)?;
        let rd = metrics::representation_diversity(&self.net, &sets, gating)?;
        let gcr = metrics::gradient_conflict_rate(&self.net, &sets, gating)?;
        Ok((perf, rd, gcr))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    #[serde(flatten)]
    pub metrics: MetricRecord,
    pub events: Events,
    pub code_version: String,
    pub config_hash: String,
    pub benchmark_seed: u64,
    /// Mean pairwise cosine similarity of the track's mean encoded inputs.
    pub mean_similarity: f64,
    pub hidden: usize,
    pub task_log: Vec<TaskLog>,
}

impl RunResult {
    /// The same result with the wall-clock field zeroed.
    pub fn without_timing(&self) -> Self {
        let mut r = self.clone();
        r.metrics.wall_ms = 0;
        r
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Short hex digest of everything that determines a cell's behaviour
/// besides the seed and track.
pub fn config_hash(config: &MechanismConfig, settings: &RunSettings) -> String {
    let text = serde_json::to_string(&(&config.flags, &config.hyper, settings)).expect("serialisable");
    let digest = Sha256::digest(text.as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Generates the track, trains every task in order and evaluates the final
/// network.
pub fn run_cell(
    config: &MechanismConfig,
    settings: &RunSettings,
    track: Track,
    seed: u64,
    excised: &BTreeSet<Mechanism>,
) -> Result<RunResult> {
    let started = Instant::now();
    let spec = TrackSpec {
        track,
        params: settings.bench,
    };
    let tasks = generate_track(&spec, seed)?;
    let mut learner = Learner::with_excised(config.clone(), settings.clone(), seed, excised.clone())?;
    for ds in &tasks {
        learner.train_task(ds)?;
    }
    let (perf, rd, gcr) = learner.evaluate(&tasks)?;
    let mean_similarity = task_similarity_matrix(&tasks, learner.input())?.mean;
    let mut events = Events::default();
    for l in learner.log() {
        events.add(&l.events);
    }
    let metrics = MetricRecord {
        config: config.name.clone(),
        seed,
        track,
        perf: crate::stats::mean(&perf),
        gate_pass_rate: metrics::gate_pass_rate(&perf),
        perf_per_task: perf,
        rd,
        gcr,
        wall_ms: started.elapsed().as_millis() as u64,
        epochs_per_task: learner.log().iter().map(|l| l.epochs).collect(),
    };
    Ok(RunResult {
        metrics,
        events,
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: config_hash(config, settings),
        benchmark_seed: seed,
        mean_similarity,
        hidden: learner.net().hidden(),
        task_log: learner.log().to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn patience_counts_flat_epochs() {
        let mut s = EarlyStopping::new(300, 1e-4);
        let mut epochs = 0;
        for e in 0..2000 {
            epochs = e + 1;
            if s.observe(0.5) {
                break;
            }
        }
        assert_eq!(epochs, 301);
    }

    #[test]
    fn improvement_resets_patience() {
        let mut s = EarlyStopping::new(3, 0.0);
        assert!(!s.observe(1.0));
        assert!(!s.observe(1.0));
        assert!(!s.observe(0.9));
        assert!(!s.observe(0.9));
        assert!(!s.observe(0.9));
        assert!(s.observe(0.9));
    }
}
