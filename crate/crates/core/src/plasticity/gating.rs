//! Task-context gating of hidden activations.
//!
//! Under gating, a task sees its own neurons through a learned sigmoid gate,
//! unowned and routed-to neurons as they are, and every other task's neurons
//! attenuated by a fixed suppression factor.

use crate::error::Result;
use crate::net::{sigmoid, GrowableNet};

pub const SUPPRESSION: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct GateFactors {
    /// Multiplier applied to each neuron's activation.
    pub factor: Vec<f64>,
    /// Whether the factor is `sigmoid(g_i)` of a trainable gate.
    pub trainable: Vec<bool>,
}

impl GateFactors {
    pub fn identity(n: usize) -> Self {
        Self {
            factor: vec![1.0; n],
            trainable: vec![false; n],
        }
    }

    pub fn compute(net: &GrowableNet, task: usize, gating: bool) -> Result<Self> {
        let slot = net.task(task)?;
        let n = net.hidden();
        if !gating {
            return Ok(Self::identity(n));
        }
        let gate = &net.params.gates[task];
        let mut factor = Vec::with_capacity(n);
        let mut trainable = Vec::with_capacity(n);
        for (i, owner) in net.owners().iter().enumerate() {
            match owner {
                Some(t) if *t == task => {
                    factor.push(sigmoid(gate[i]));
                    trainable.push(true);
                }
                Some(t) if !slot.reads.contains(t) => {
                    factor.push(SUPPRESSION);
                    trainable.push(false);
                }
                _ => {
                    factor.push(1.0);
                    trainable.push(false);
                }
            }
        }
        Ok(Self { factor, trainable })
    }
}

/// Applies the task's gate factors to a vector of hidden activations.
pub fn apply_gating(h: &[f64], net: &GrowableNet, task: usize, gating: bool) -> Result<Vec<f64>> {
    let gates = GateFactors::compute(net, task, gating)?;
    Ok(h.iter().zip(&gates.factor).map(|(a, f)| a * f).collect())
}
