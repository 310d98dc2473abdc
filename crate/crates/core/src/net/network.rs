use std::ops::Range;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::params::{Gradients, Params};
use crate::error::{Error, Result};
use crate::plasticity::gating::GateFactors;
use crate::rng::Stream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    Regression,
    Classification,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSlot {
    pub kind: LossKind,
    /// Earlier tasks whose neurons this task may read without suppression.
    pub reads: Vec<usize>,
}

/// Single hidden layer of tanh units that widens over time, one output head
/// per task, and per-neuron ownership and importance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowableNet {
    pub params: Params,
    owner: Vec<Option<usize>>,
    importance: Vec<f64>,
    tasks: Vec<TaskSlot>,
}

/// Everything the backward pass needs from one forward evaluation.
#[derive(Debug, Clone)]
pub struct ForwardTrace {
    pub task: usize,
    pub input: Vec<f64>,
    pub pre: Vec<f64>,
    /// `tanh(pre)`, before gating.
    pub activation: Vec<f64>,
    /// Post-gating hidden activations read by the head.
    pub hidden: Vec<f64>,
    pub output: Vec<f64>,
    pub gates: Arc<GateFactors>,
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Per-example loss and its derivative with respect to the raw outputs.
/// Regression uses mean squared error; classification uses the logistic
/// cross-entropy on logits.
pub fn loss_and_grad(kind: LossKind, output: &[f64], target: &[f64]) -> (f64, Vec<f64>) {
    let m = output.len() as f64;
    match kind {
        LossKind::Regression => {
            let mut loss = 0.0;
            let grad = output
                .iter()
                .zip(target)
                .map(|(&y, &t)| {
                    loss += (y - t) * (y - t);
                    2.0 * (y - t) / m
                })
                .collect();
            (loss / m, grad)
        }
        LossKind::Classification => {
            let mut loss = 0.0;
            let grad = output
                .iter()
                .zip(target)
                .map(|(&z, &t)| {
                    loss += softplus(z) - t * z;
                    (sigmoid(z) - t) / m
                })
                .collect();
            (loss / m, grad)
        }
    }
}

impl GrowableNet {
    pub fn new(input_dim: usize) -> Self {
        Self {
            params: Params::new(input_dim),
            owner: Vec::new(),
            importance: Vec::new(),
            tasks: Vec::new(),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.params.input_dim
    }

    pub fn hidden(&self) -> usize {
        self.params.hidden
    }

    pub fn num_tasks(&self) -> usize {
        self.tasks.len()
    }

    pub fn task(&self, task: usize) -> Result<&TaskSlot> {
        self.tasks.get(task).ok_or(Error::UnknownTask(task))
    }

    pub fn add_read(&mut self, task: usize, source: usize) -> Result<()> {
        self.task(source)?;
        let slot = self.tasks.get_mut(task).ok_or(Error::UnknownTask(task))?;
        if !slot.reads.contains(&source) {
            slot.reads.push(source);
        }
        Ok(())
    }

    /// Registers a new task with a zero-initialised head and gate vector.
    pub fn add_task(&mut self, kind: LossKind, out_dim: usize) -> usize {
        self.tasks.push(TaskSlot {
            kind,
            reads: Vec::new(),
        });
        self.params.add_task(out_dim)
    }

    pub fn owner(&self, neuron: usize) -> Option<usize> {
        self.owner[neuron]
    }

    pub fn owners(&self) -> &[Option<usize>] {
        &self.owner
    }

    pub fn importance(&self) -> &[f64] {
        &self.importance
    }

    pub fn importance_mut(&mut self) -> &mut [f64] {
        &mut self.importance
    }

    pub fn is_frozen(&self, neuron: usize) -> bool {
        self.importance[neuron] >= 1.0
    }

    pub fn frozen_rows(&self) -> Vec<bool> {
        self.importance.iter().map(|&v| v >= 1.0).collect()
    }

    /// Binary ownership vector `m^(task)`.
    pub fn mask(&self, task: usize) -> Vec<bool> {
        self.owner.iter().map(|&o| o == Some(task)).collect()
    }

    /// Indices in `supp(m^(task))`.
    pub fn support(&self, task: usize) -> Vec<usize> {
        (0..self.hidden()).filter(|&i| self.owner[i] == Some(task)).collect()
    }

    /// Neurons the task may read unsuppressed: its own, the unowned pool,
    /// and neurons of tasks it was routed to.
    pub fn forward_mask(&self, task: usize) -> Result<Vec<bool>> {
        let slot = self.task(task)?;
        Ok(self
            .owner
            .iter()
            .map(|o| match o {
                None => true,
                Some(t) => *t == task || slot.reads.contains(t),
            })
            .collect())
    }

    /// Appends `count` hidden units. Incoming weights are
    /// `init_scale · N(0, 1)` from `rng`, biases zero, importance zero; every
    /// head and gate gets zero entries so existing outputs are unchanged.
    pub fn grow(
        &mut self,
        count: usize,
        owner: Option<usize>,
        init_scale: f64,
        rng: &mut Stream,
    ) -> Result<Range<usize>> {
        if let Some(t) = owner {
            self.task(t)?;
        }
        let start = self.hidden();
        self.params.grow_hidden(count);
        for v in &mut self.params.w_in[start * self.params.input_dim..] {
            *v = init_scale * rng.normal();
        }
        self.owner.resize(start + count, owner);
        self.importance.resize(start + count, 0.0);
        Ok(start..start + count)
    }

    pub fn forward(&self, x_enc: &[f64], task: usize, gating: bool) -> Result<ForwardTrace> {
        let gates = Arc::new(GateFactors::compute(self, task, gating)?);
        self.forward_with(x_enc, task, gates)
    }

    /// Forward pass with precomputed gate factors (shared across a batch).
    pub fn forward_with(&self, x_enc: &[f64], task: usize, gates: Arc<GateFactors>) -> Result<ForwardTrace> {
        let d = self.input_dim();
        if x_enc.len() != d {
            return Err(Error::InputShape {
                expected: d,
                actual: x_enc.len(),
            });
        }
        let head = self.params.heads.get(task).ok_or(Error::UnknownTask(task))?;
        let n = self.hidden();
        let mut pre = Vec::with_capacity(n);
        let mut activation = Vec::with_capacity(n);
        let mut hidden = Vec::with_capacity(n);
        for i in 0..n {
            let row = self.params.row(i);
            let z = self.params.bias[i] + dot(row, x_enc);
            let a = z.tanh();
            pre.push(z);
            activation.push(a);
            hidden.push(a * gates.factor[i]);
        }
        let out_dim = head.out_dim;
        let mut output = head.bias.clone();
        for (i, &h) in hidden.iter().enumerate() {
            if h != 0.0 {
                let w = &head.weights[i * out_dim..(i + 1) * out_dim];
                for (o, &wk) in output.iter_mut().zip(w) {
                    *o += wk * h;
                }
            }
        }
        Ok(ForwardTrace {
            task,
            input: x_enc.to_vec(),
            pre,
            activation,
            hidden,
            output,
            gates,
        })
    }

    /// Output only.
    pub fn predict(&self, x_enc: &[f64], task: usize, gating: bool) -> Result<Vec<f64>> {
        Ok(self.forward(x_enc, task, gating)?.output)
    }

    /// Exact gradient of the per-example loss for `trace`.
    pub fn backward(&self, trace: &ForwardTrace, target: &[f64]) -> Result<Gradients> {
        let mut grads = self.params.zeros_like();
        self.accumulate_gradient(trace, target, 1.0, &mut grads)?;
        Ok(grads)
    }

    /// Adds `scale ·` the per-example gradient into `grads` and returns the
    /// unscaled loss.
    pub fn accumulate_gradient(
        &self,
        trace: &ForwardTrace,
        target: &[f64],
        scale: f64,
        grads: &mut Gradients,
    ) -> Result<f64> {
        let task = trace.task;
        let slot = self.task(task)?;
        let head = &self.params.heads[task];
        if target.len() != head.out_dim {
            return Err(Error::TargetShape {
                task,
                expected: head.out_dim,
                actual: target.len(),
            });
        }
        let (loss, d_out) = loss_and_grad(slot.kind, &trace.output, target);
        let out_dim = head.out_dim;
        let d = self.input_dim();
        {
            let gh = &mut grads.heads[task];
            for (gb, &g) in gh.bias.iter_mut().zip(&d_out) {
                *gb += scale * g;
            }
        }
        for i in 0..self.hidden() {
            let w = &head.weights[i * out_dim..(i + 1) * out_dim];
            let d_hidden: f64 = w.iter().zip(&d_out).map(|(a, b)| a * b).sum();
            let h = trace.hidden[i];
            if h != 0.0 {
                let gw = &mut grads.heads[task].weights[i * out_dim..(i + 1) * out_dim];
                for (g, &dk) in gw.iter_mut().zip(&d_out) {
                    *g += scale * dk * h;
                }
            }
            if d_hidden == 0.0 {
                continue;
            }
            let a = trace.activation[i];
            let factor = trace.gates.factor[i];
            if trace.gates.trainable[i] {
                // factor = sigmoid(g), so d factor / d g = factor (1 - factor)
                grads.gates[task][i] += scale * d_hidden * a * factor * (1.0 - factor);
            }
            let d_pre = d_hidden * factor * (1.0 - a * a);
            if d_pre == 0.0 {
                continue;
            }
            let s = scale * d_pre;
            grads.bias[i] += s;
            let row = &mut grads.w_in[i * d..(i + 1) * d];
            for (g, &x) in row.iter_mut().zip(&trace.input) {
                *g += s * x;
            }
        }
        Ok(loss)
    }

    /// Mean loss and mean gradient over a batch. Returns the traces as well so
    /// callers can reuse the activations.
    pub fn batch_gradient(
        &self,
        inputs: &[&[f64]],
        targets: &[&[f64]],
        task: usize,
        gating: bool,
        grads: &mut Gradients,
    ) -> Result<(f64, Vec<ForwardTrace>)> {
        if inputs.len() != targets.len() {
            return Err(Error::LengthMismatch {
                left: inputs.len(),
                right: targets.len(),
            });
        }
        if inputs.is_empty() {
            return Err(Error::EmptyDataset(task));
        }
        let gates = Arc::new(GateFactors::compute(self, task, gating)?);
        let scale = 1.0 / inputs.len() as f64;
        let mut loss = 0.0;
        let mut traces = Vec::with_capacity(inputs.len());
        for (x, y) in inputs.iter().zip(targets) {
            let trace = self.forward_with(x, task, gates.clone())?;
            loss += self.accumulate_gradient(&trace, y, scale, grads)?;
            traces.push(trace);
        }
        Ok((loss * scale, traces))
    }

    /// Mean loss over a batch without gradients.
    pub fn batch_loss(&self, inputs: &[&[f64]], targets: &[&[f64]], task: usize, gating: bool) -> Result<f64> {
        let kind = self.task(task)?.kind;
        let gates = Arc::new(GateFactors::compute(self, task, gating)?);
        let mut loss = 0.0;
        for (x, y) in inputs.iter().zip(targets) {
            let trace = self.forward_with(x, task, gates.clone())?;
            loss += loss_and_grad(kind, &trace.output, y).0;
        }
        Ok(loss / inputs.len() as f64)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
