//! Diagonal-Fisher elastic consolidation in global, topology-masked, and
//! per-task topology-masked forms.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::config::EwcMode;
use crate::error::{Error, Result};
use crate::net::{Gradients, GrowableNet, Params};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FisherStore {
    mode: EwcMode,
    accumulated: Option<Params>,
    per_task: BTreeMap<usize, Params>,
    anchors: BTreeMap<usize, Params>,
    latest: Option<usize>,
}

/// 1 on the parameters a task owns (incoming rows and biases of its neurons,
/// and its head), 0 elsewhere.
pub fn support_mask(net: &GrowableNet, task: usize) -> Params {
    let mut mask = net.params.zeros_like();
    for i in net.support(task) {
        mask.row_mut(i).fill(1.0);
        mask.bias[i] = 1.0;
    }
    let head = &mut mask.heads[task];
    head.weights.fill(1.0);
    head.bias.fill(1.0);
    mask
}

/// Diagonal empirical Fisher: mean of squared per-example loss gradients.
pub fn fisher_diagonal(
    net: &GrowableNet,
    inputs: &[Vec<f64>],
    targets: &[Vec<f64>],
    task: usize,
    gating: bool,
) -> Result<Params> {
    if inputs.is_empty() {
        return Err(Error::EmptyDataset(task));
    }
    let mut fisher = net.params.zeros_like();
    let mut grads = net.params.zeros_like();
    let scale = 1.0 / inputs.len() as f64;
    for (x, y) in inputs.iter().zip(targets) {
        grads.fill(0.0);
        let trace = net.forward(x, task, gating)?;
        net.accumulate_gradient(&trace, y, 1.0, &mut grads)?;
        fisher.zip_apply(&grads, |f, g| *f += scale * g * g);
    }
    Ok(fisher)
}

impl FisherStore {
    pub fn new(mode: EwcMode) -> Self {
        Self {
            mode,
            accumulated: None,
            per_task: BTreeMap::new(),
            anchors: BTreeMap::new(),
            latest: None,
        }
    }

    pub fn mode(&self) -> EwcMode {
        self.mode
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty()
    }

    pub fn accumulated(&self) -> Option<&Params> {
        self.accumulated.as_ref()
    }

    pub fn per_task(&self) -> &BTreeMap<usize, Params> {
        &self.per_task
    }

    pub fn anchor(&self, task: usize) -> Option<&Params> {
        self.anchors.get(&task)
    }

    /// Snapshots `θ*` for the task and folds its Fisher diagonal into the store.
    pub fn compute_fisher(
        &mut self,
        net: &GrowableNet,
        inputs: &[Vec<f64>],
        targets: &[Vec<f64>],
        task: usize,
        gating: bool,
    ) -> Result<()> {
        let mut fisher = fisher_diagonal(net, inputs, targets, task, gating)?;
        if matches!(self.mode, EwcMode::Topo | EwcMode::TopoPertask) {
            let mask = support_mask(net, task);
            fisher.zip_apply(&mask, |f, m| {
                if m == 0.0 {
                    *f = 0.0;
                }
            });
        }
        self.anchors.insert(task, net.params.clone());
        self.latest = Some(task);
        match self.mode {
            EwcMode::Off => {}
            EwcMode::Global | EwcMode::Topo => {
                let acc = self.accumulated.get_or_insert_with(|| fisher.zeros_like());
                acc.conform_to(&fisher);
                acc.add_scaled(&fisher, 1.0);
            }
            EwcMode::TopoPertask => {
                self.per_task.insert(task, fisher);
            }
        }
        Ok(())
    }

    /// `λ Σ F ⊙ (θ − θ*)`, or `None` while the store is empty.
    pub fn penalty_grad(&self, net: &GrowableNet, lambda: f64) -> Option<Gradients> {
        let theta = &net.params;
        let mut out = theta.zeros_like();
        let mut term = |fisher: &Params, anchor: &Params| {
            let mut f = fisher.clone();
            let mut a = anchor.clone();
            f.conform_to(theta);
            a.conform_to(theta);
            let mut diff = theta.clone();
            diff.add_scaled(&a, -1.0);
            diff.zip_apply(&f, |d, fi| *d *= fi);
            out.add_scaled(&diff, lambda);
        };
        match self.mode {
            EwcMode::Off => return None,
            EwcMode::Global | EwcMode::Topo => {
                let acc = self.accumulated.as_ref()?;
                let anchor = self.anchors.get(&self.latest?)?;
                term(acc, anchor);
            }
            EwcMode::TopoPertask => {
                if self.per_task.is_empty() {
                    return None;
                }
                for (task, fisher) in &self.per_task {
                    term(fisher, &self.anchors[task]);
                }
            }
        }
        Some(out)
    }

    /// Total Fisher mass lying outside the parameter support of the tasks that
    /// contributed it. Zero in the topology-masked modes.
    pub fn mass_outside_support(&self, net: &GrowableNet) -> f64 {
        let outside = |fisher: &Params, mask: &Params| {
            let mut f = fisher.clone();
            f.conform_to(mask);
            f.flatten()
                .iter()
                .zip(mask.flatten())
                .filter(|(_, m)| *m == 0.0)
                .map(|(v, _)| v.abs())
                .sum::<f64>()
        };
        match self.mode {
            EwcMode::Off => 0.0,
            EwcMode::Global | EwcMode::Topo => {
                let Some(acc) = &self.accumulated else {
                    return 0.0;
                };
                let mut union = net.params.zeros_like();
                for &task in self.anchors.keys() {
                    union.zip_apply(&support_mask(net, task), |u, m| *u = u.max(m));
                }
                outside(acc, &union)
            }
            EwcMode::TopoPertask => self
                .per_task
                .iter()
                .map(|(&task, f)| outside(f, &support_mask(net, task)))
                .sum(),
        }
    }
}
