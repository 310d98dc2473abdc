//! Meta-replay memory and the mixed-consolidation gradient.
//!
//! Each finished task leaves a compressed summary: the mean and diagonal
//! standard deviation of its encoded training inputs plus a small exemplar
//! set. During later tasks a replay gradient is drawn with probability `ρ`
//! per step and added to the current-task gradient.

use serde::{Deserialize, Serialize};

use super::config::Hyper;
use crate::error::Result;
use crate::net::{Gradients, GrowableNet, LossKind};
use crate::rng::Stream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskMemory {
    pub task: usize,
    pub kind: LossKind,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub exemplars: Vec<(Vec<f64>, Vec<f64>)>,
}

impl TaskMemory {
    pub fn summarize(
        task: usize,
        kind: LossKind,
        inputs: &[Vec<f64>],
        targets: &[Vec<f64>],
        capacity: usize,
        rng: &mut Stream,
    ) -> Self {
        let (mean, std) = mean_std(inputs);
        let mut order: Vec<usize> = (0..inputs.len()).collect();
        rng.shuffle(&mut order);
        let exemplars = order
            .into_iter()
            .take(capacity)
            .map(|i| (inputs[i].clone(), targets[i].clone()))
            .collect();
        Self {
            task,
            kind,
            mean,
            std,
            exemplars,
        }
    }
}

/// Column mean and population standard deviation.
pub fn mean_std(rows: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let Some(first) = rows.first() else {
        return (Vec::new(), Vec::new());
    };
    let n = rows.len() as f64;
    let mean = crate::stats::column_mean(rows);
    let mut var = vec![0.0; first.len()];
    for r in rows {
        for ((s, v), m) in var.iter_mut().zip(r).zip(&mean) {
            *s += (v - m) * (v - m) / n;
        }
    }
    (mean, var.into_iter().map(f64::sqrt).collect())
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReplayBuffer {
    capacity: usize,
    memories: Vec<TaskMemory>,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity,
            memories: Vec::new(),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn insert(&mut self, task: usize, kind: LossKind, inputs: &[Vec<f64>], targets: &[Vec<f64>], rng: &mut Stream) {
        let memory = TaskMemory::summarize(task, kind, inputs, targets, self.capacity, rng);
        self.memories.retain(|m| m.task != task);
        self.memories.push(memory);
    }

    pub fn memories(&self) -> &[TaskMemory] {
        &self.memories
    }

    pub fn get(&self, task: usize) -> Option<&TaskMemory> {
        self.memories.iter().find(|m| m.task == task)
    }

    pub fn is_empty(&self) -> bool {
        self.memories.is_empty()
    }
}

/// Draws a replay batch from one memory: exemplars first, topped up with
/// Gaussian samples from the stored summary. Synthetic inputs take the target
/// of their nearest exemplar.
pub fn replay_batch(memory: &TaskMemory, batch: usize, rng: &mut Stream) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let mut inputs = Vec::with_capacity(batch);
    let mut targets = Vec::with_capacity(batch);
    let ex = &memory.exemplars;
    if ex.len() > batch {
        let mut order: Vec<usize> = (0..ex.len()).collect();
        for i in 0..batch {
            let j = i + rng.below(ex.len() - i);
            order.swap(i, j);
        }
        for &i in &order[..batch] {
            inputs.push(ex[i].0.clone());
            targets.push(ex[i].1.clone());
        }
    } else {
        for (x, y) in ex {
            inputs.push(x.clone());
            targets.push(y.clone());
        }
    }
    while inputs.len() < batch && !ex.is_empty() {
        let x: Vec<f64> = memory
            .mean
            .iter()
            .zip(&memory.std)
            .map(|(m, s)| m + s * rng.normal())
            .collect();
        let nearest = ex
            .iter()
            .min_by(|a, b| sq_dist(&a.0, &x).total_cmp(&sq_dist(&b.0, &x)))
            .map(|e| e.1.clone())
            .unwrap();
        inputs.push(x);
        targets.push(nearest);
    }
    (inputs, targets)
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// With probability `ρ`, the replay-weighted gradient of a uniformly chosen
/// earlier task's loss through its own (held) head; otherwise `None`.
pub fn replay_step(
    net: &GrowableNet,
    buffer: &ReplayBuffer,
    current_task: usize,
    hyper: &Hyper,
    gating: bool,
    rng: &mut Stream,
) -> Result<Option<Gradients>> {
    let prior: Vec<&TaskMemory> = buffer
        .memories()
        .iter()
        .filter(|m| m.task != current_task && !m.exemplars.is_empty())
        .collect();
    if prior.is_empty() || !rng.bernoulli(hyper.replay_ratio) {
        return Ok(None);
    }
    let memory = prior[rng.below(prior.len())];
    let (xs, ys) = replay_batch(memory, hyper.replay_batch, rng);
    let x_refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
    let y_refs: Vec<&[f64]> = ys.iter().map(Vec::as_slice).collect();
    let mut grads = net.params.zeros_like();
    net.batch_gradient(&x_refs, &y_refs, memory.task, gating, &mut grads)?;
    hold_replayed_head(&mut grads, memory.task);
    grads.scale(hyper.replay_weight);
    Ok(Some(grads))
}

/// Keeps the replayed task's own head and gate fixed: rehearsal acts on
/// the hidden layer only, so an earlier head is never refitted to the small
/// exemplar set.
fn hold_replayed_head(grads: &mut Gradients, task: usize) {
    let head = &mut grads.heads[task];
    head.weights.fill(0.0);
    head.bias.fill(0.0);
    grads.gates[task].fill(0.0);
}
