//! Perf, representation diversity, gradient conflict rate and gate pass rate.

use serde::{Deserialize, Serialize};

use crate::bench::Track;
use crate::error::{Error, Result};
use crate::net::{GrowableNet, LossKind};
use crate::stats::{column_mean, cosine};

/// Per-task pass threshold on perf.
pub const TASK_PASS_THRESHOLD: f64 = 0.5;
/// System-level gate on the fraction of passing tasks.
pub const GATE_THRESHOLD: f64 = 0.75;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub config: String,
    pub seed: u64,
    pub track: Track,
    pub perf_per_task: Vec<f64>,
    #[serde(rename = "Perf")]
    pub perf: f64,
    #[serde(rename = "RD")]
    pub rd: f64,
    #[serde(rename = "GCR")]
    pub gcr: f64,
    pub gate_pass_rate: f64,
    pub wall_ms: u64,
    pub epochs_per_task: Vec<usize>,
}

/// Encoded evaluation data of one task.
#[derive(Debug, Clone, Copy)]
pub struct EvalSet<'a> {
    pub task: usize,
    pub inputs: &'a [Vec<f64>],
    pub targets: &'a [Vec<f64>],
}

/// R² clipped to `[0, 1]` for regression, accuracy of `logit ≥ 0` for
/// classification.
pub fn perf_task(predictions: &[Vec<f64>], targets: &[Vec<f64>], kind: LossKind) -> Result<f64> {
    if predictions.len() != targets.len() {
        return Err(Error::LengthMismatch {
            left: predictions.len(),
            right: targets.len(),
        });
    }
    if targets.is_empty() {
        return Err(Error::EmptyDataset(0));
    }
    match kind {
        LossKind::Regression => {
            let mean = column_mean(targets);
            let mut sse = 0.0;
            let mut sst = 0.0;
            for (p, t) in predictions.iter().zip(targets) {
                for k in 0..t.len() {
                    sse += (p[k] - t[k]).powi(2);
                    sst += (t[k] - mean[k]).powi(2);
                }
            }
            if sst == 0.0 {
                return Ok(if sse == 0.0 { 1.0 } else { 0.0 });
            }
            Ok((1.0 - sse / sst).clamp(0.0, 1.0))
        }
        LossKind::Classification => {
            let correct = predictions
                .iter()
                .zip(targets)
                .filter(|(p, t)| (p[0] >= 0.0) == (t[0] > 0.5))
                .count();
            Ok(correct as f64 / targets.len() as f64)
        }
    }
}

/// Per-task perf of `net` on each evaluation set.
pub fn evaluate(net: &GrowableNet, sets: &[EvalSet<'_>], gating: bool) -> Result<Vec<f64>> {
    sets.iter()
        .map(|s| {
            let preds = s
                .inputs
                .iter()
                .map(|x| net.predict(x, s.task, gating))
                .collect::<Result<Vec<_>>>()?;
            perf_task(&preds, s.targets, net.task(s.task)?.kind)
        })
        .collect()
}

/// Mean over unordered pairs of `clamp(1 − cos, 0, 1)`; a zero-norm vector
/// makes its pairs contribute 1.
pub fn diversity_of_means(means: &[Vec<f64>]) -> f64 {
    let mut total = 0.0;
    let mut pairs = 0usize;
    for i in 0..means.len() {
        for j in i + 1..means.len() {
            let zero = |v: &[f64]| v.iter().all(|&x| x == 0.0);
            total += if zero(&means[i]) || zero(&means[j]) {
                1.0
            } else {
                (1.0 - cosine(&means[i], &means[j])).clamp(0.0, 1.0)
            };
            pairs += 1;
        }
    }
    if pairs == 0 {
        0.0
    } else {
        total / pairs as f64
    }
}

/// Mean gated hidden representation of each task over its evaluation set.
pub fn mean_representations(net: &GrowableNet, sets: &[EvalSet<'_>], gating: bool) -> Result<Vec<Vec<f64>>> {
    sets.iter()
        .map(|s| {
            let hs = s
                .inputs
                .iter()
                .map(|x| Ok(net.forward(x, s.task, gating)?.hidden))
                .collect::<Result<Vec<_>>>()?;
            Ok(column_mean(&hs))
        })
        .collect()
}

pub fn representation_diversity(net: &GrowableNet, sets: &[EvalSet<'_>], gating: bool) -> Result<f64> {
    Ok(diversity_of_means(&mean_representations(net, sets, gating)?))
}

/// Fraction of co-nonzero entries with opposite signs, or `None` when no
/// entry is nonzero in both.
pub fn conflict_fraction(a: &[f64], b: &[f64]) -> Option<f64> {
    let mut both = 0usize;
    let mut opposite = 0usize;
    for (&x, &y) in a.iter().zip(b) {
        if x != 0.0 && y != 0.0 {
            both += 1;
            if (x > 0.0) != (y > 0.0) {
                opposite += 1;
            }
        }
    }
    (both > 0).then(|| opposite as f64 / both as f64)
}

/// `100 ×` mean conflict fraction over unordered pairs of gradient vectors;
/// pairs without overlap contribute 0.
pub fn conflict_rate_of(grads: &[Vec<f64>]) -> f64 {
    let mut total = 0.0;
    let mut pairs = 0usize;
    for i in 0..grads.len() {
        for j in i + 1..grads.len() {
            total += conflict_fraction(&grads[i], &grads[j]).unwrap_or(0.0);
            pairs += 1;
        }
    }
    if pairs == 0 {
        0.0
    } else {
        100.0 * total / pairs as f64
    }
}

/// Neurons whose input-layer parameters count as shared: unowned neurons and
/// neurons of tasks that another task reads through routing. When there are
/// none, every neuron.
pub fn shared_neurons(net: &GrowableNet) -> Result<Vec<usize>> {
    let mut read = Vec::new();
    for t in 0..net.num_tasks() {
        read.extend_from_slice(&net.task(t)?.reads);
    }
    let shared: Vec<usize> = (0..net.hidden())
        .filter(|&i| net.owner(i).is_none_or(|o| read.contains(&o)))
        .collect();
    Ok(if shared.is_empty() {
        (0..net.hidden()).collect()
    } else {
        shared
    })
}

/// Gradient conflict rate, in percent, on the input-layer weights and biases
/// of the [`shared_neurons`]. Gradients are of each task's mean loss over its
/// evaluation set.
pub fn gradient_conflict_rate(net: &GrowableNet, sets: &[EvalSet<'_>], gating: bool) -> Result<f64> {
    let d = net.input_dim();
    let shared = shared_neurons(net)?;
    let mut grads = Vec::with_capacity(sets.len());
    for s in sets {
        let xs: Vec<&[f64]> = s.inputs.iter().map(Vec::as_slice).collect();
        let ys: Vec<&[f64]> = s.targets.iter().map(Vec::as_slice).collect();
        let mut g = net.params.zeros_like();
        net.batch_gradient(&xs, &ys, s.task, gating, &mut g)?;
        let mut v = Vec::with_capacity(shared.len() * (d + 1));
        for &n in &shared {
            v.extend_from_slice(&g.w_in[n * d..(n + 1) * d]);
            v.push(g.bias[n]);
        }
        grads.push(v);
    }
    Ok(conflict_rate_of(&grads))
}

/// Fraction of tasks with perf at or above [`TASK_PASS_THRESHOLD`].
pub fn gate_pass_rate(perfs: &[f64]) -> f64 {
    if perfs.is_empty() {
        return 0.0;
    }
    perfs.iter().filter(|&&p| p >= TASK_PASS_THRESHOLD).count() as f64 / perfs.len() as f64
}
