//! Norm-preserving Hebbian co-activation writes on the current task's rows.

use crate::error::Result;
use crate::net::{ForwardTrace, GrowableNet};

/// `η · mean_b(h_i · φ_j)` for neuron `i`, before renormalisation.
pub fn hebbian_delta(traces: &[ForwardTrace], neuron: usize, rate: f64) -> Vec<f64> {
    let Some(first) = traces.first() else {
        return Vec::new();
    };
    let mut delta = vec![0.0; first.input.len()];
    let scale = rate / traces.len() as f64;
    for t in traces {
        let h = t.hidden[neuron];
        if h == 0.0 {
            continue;
        }
        for (d, &x) in delta.iter_mut().zip(&t.input) {
            *d += scale * h * x;
        }
    }
    delta
}

/// Applies the Hebbian delta to every unfrozen neuron the task owns, then
/// rescales each touched row back to its previous Euclidean norm.
pub fn hebbian_update(net: &mut GrowableNet, traces: &[ForwardTrace], task: usize, rate: f64) -> Result<usize> {
    net.task(task)?;
    if traces.is_empty() {
        return Ok(0);
    }
    let mut touched = 0;
    for i in net.support(task) {
        if net.is_frozen(i) {
            continue;
        }
        let delta = hebbian_delta(traces, i, rate);
        if delta.iter().all(|&d| d == 0.0) {
            continue;
        }
        let row = net.params.row_mut(i);
        let before = norm(row);
        for (w, d) in row.iter_mut().zip(&delta) {
            *w += d;
        }
        let after = norm(row);
        if after > 0.0 {
            let k = before / after;
            row.iter_mut().for_each(|w| *w *= k);
        }
        touched += 1;
    }
    Ok(touched)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
