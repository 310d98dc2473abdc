//! Activity-driven importance, freeze scaling, and task freezing.

use crate::error::Result;
use crate::net::{Gradients, GrowableNet};

/// `ν_i ← (1 − α) ν_i + α · 1[|h_i| > τ]` for every neuron not yet frozen.
pub fn update_importance(importance: &mut [f64], activity: &[f64], alpha: f64, tau: f64) {
    for (nu, &h) in importance.iter_mut().zip(activity) {
        if *nu >= 1.0 {
            continue;
        }
        let hit = if h.abs() > tau { 1.0 } else { 0.0 };
        *nu = (1.0 - alpha) * *nu + alpha * hit;
    }
}

/// Masks incoming-row and bias gradients by importance.
///
/// Neurons with `ν ≥ 1` are hard-frozen whatever `continuous` says. Otherwise
/// `continuous` scales by `1 − ν`.
pub fn apply_freeze_scaling(grads: &mut Gradients, importance: &[f64], continuous: bool) {
    let d = grads.input_dim;
    for (i, &nu) in importance.iter().enumerate().take(grads.hidden) {
        let factor = if nu >= 1.0 {
            0.0
        } else if continuous {
            1.0 - nu
        } else {
            continue;
        };
        for g in &mut grads.w_in[i * d..(i + 1) * d] {
            *g *= factor;
        }
        grads.bias[i] *= factor;
    }
}

/// `ν_i ← max(ν_i, 1)` on the task's support.
pub fn freeze_task(net: &mut GrowableNet, task: usize) -> Result<usize> {
    net.task(task)?;
    let support = net.support(task);
    let importance = net.importance_mut();
    for &i in &support {
        importance[i] = importance[i].max(1.0);
    }
    Ok(support.len())
}
