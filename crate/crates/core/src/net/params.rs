use serde::{Deserialize, Serialize};

/// Output head of one task. `weights` is stored neuron-major (`hidden × out_dim`)
/// so that growing the hidden layer only appends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadParams {
    pub out_dim: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl HeadParams {
    pub fn weight(&self, neuron: usize, out: usize) -> f64 {
        self.weights[neuron * self.out_dim + out]
    }
}

/// Every trainable tensor of a [`GrowableNet`](super::GrowableNet).
///
/// The same layout doubles as the gradient set, the Fisher diagonal, the
/// EWC anchors and the optimizer moments, which keeps all of them aligned
/// through growth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub input_dim: usize,
    pub hidden: usize,
    /// `hidden × input_dim`, row-major.
    pub w_in: Vec<f64>,
    pub bias: Vec<f64>,
    pub heads: Vec<HeadParams>,
    /// One gate vector of length `hidden` per task.
    pub gates: Vec<Vec<f64>>,
}

impl Params {
    pub fn new(input_dim: usize) -> Self {
        Self {
            input_dim,
            hidden: 0,
            w_in: Vec::new(),
            bias: Vec::new(),
            heads: Vec::new(),
            gates: Vec::new(),
        }
    }

    pub fn zeros_like(&self) -> Self {
        let mut out = self.clone();
        out.fill(0.0);
        out
    }

    pub fn fill(&mut self, value: f64) {
        for chunk in self.chunks_mut() {
            chunk.fill(value);
        }
    }

    pub fn num_tasks(&self) -> usize {
        self.heads.len()
    }

    /// Appends `count` zero-initialised hidden units to every tensor.
    pub fn grow_hidden(&mut self, count: usize) {
        self.hidden += count;
        self.w_in.resize(self.hidden * self.input_dim, 0.0);
        self.bias.resize(self.hidden, 0.0);
        for head in &mut self.heads {
            head.weights.resize(self.hidden * head.out_dim, 0.0);
        }
        for gate in &mut self.gates {
            gate.resize(self.hidden, 0.0);
        }
    }

    pub fn add_task(&mut self, out_dim: usize) -> usize {
        self.heads.push(HeadParams {
            out_dim,
            weights: vec![0.0; self.hidden * out_dim],
            bias: vec![0.0; out_dim],
        });
        self.gates.push(vec![0.0; self.hidden]);
        self.heads.len() - 1
    }

    /// Extends `self` with zeros until it has the shape of `template`.
    pub fn conform_to(&mut self, template: &Params) {
        debug_assert_eq!(self.input_dim, template.input_dim);
        if template.hidden > self.hidden {
            self.grow_hidden(template.hidden - self.hidden);
        }
        for head in &template.heads[self.heads.len()..] {
            self.add_task(head.out_dim);
        }
    }

    pub fn same_shape(&self, other: &Params) -> bool {
        self.input_dim == other.input_dim
            && self.hidden == other.hidden
            && self.heads.len() == other.heads.len()
            && self.heads.iter().zip(&other.heads).all(|(a, b)| a.out_dim == b.out_dim)
    }

    pub fn row(&self, neuron: usize) -> &[f64] {
        &self.w_in[neuron * self.input_dim..(neuron + 1) * self.input_dim]
    }

    pub fn row_mut(&mut self, neuron: usize) -> &mut [f64] {
        let d = self.input_dim;
        &mut self.w_in[neuron * d..(neuron + 1) * d]
    }

    /// All tensors in a fixed order: `w_in`, `bias`, then per task head
    /// weights, head bias, and gate.
    pub fn chunks(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = vec![&self.w_in, &self.bias];
        for head in &self.heads {
            out.push(&head.weights);
            out.push(&head.bias);
        }
        for gate in &self.gates {
            out.push(gate);
        }
        out
    }

    pub fn chunks_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = vec![&mut self.w_in, &mut self.bias];
        for head in &mut self.heads {
            out.push(&mut head.weights);
            out.push(&mut head.bias);
        }
        for gate in &mut self.gates {
            out.push(gate);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.chunks().iter().map(|c| c.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.chunks().concat()
    }

    pub fn get_flat(&self, mut index: usize) -> f64 {
        for chunk in self.chunks() {
            if index < chunk.len() {
                return chunk[index];
            }
            index -= chunk.len();
        }
        panic!("flat index out of range");
    }

    pub fn set_flat(&mut self, mut index: usize, value: f64) {
        for chunk in self.chunks_mut() {
            if index < chunk.len() {
                chunk[index] = value;
                return;
            }
            index -= chunk.len();
        }
        panic!("flat index out of range");
    }

    /// `self[i] = f(self[i], other[i])` over matching tensors.
    pub fn zip_apply(&mut self, other: &Params, mut f: impl FnMut(&mut f64, f64)) {
        assert!(self.same_shape(other), "parameter shapes differ");
        for (dst, src) in self.chunks_mut().into_iter().zip(other.chunks()) {
            for (d, &s) in dst.iter_mut().zip(src) {
                f(d, s);
            }
        }
    }

    pub fn add_scaled(&mut self, other: &Params, scale: f64) {
        self.zip_apply(other, |d, s| *d += scale * s);
    }

    pub fn scale(&mut self, factor: f64) {
        for chunk in self.chunks_mut() {
            for v in chunk {
                *v *= factor;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.chunks().iter().all(|c| c.iter().all(|v| v.is_finite()))
    }
}

/// Gradients share the parameter layout.
pub type Gradients = Params;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn growth_extends_every_tensor() {
        let mut p = Params::new(4);
        p.grow_hidden(3);
        p.add_task(2);
        p.grow_hidden(2);
        assert_eq!(p.w_in.len(), 20);
        assert_eq!(p.bias.len(), 5);
        assert_eq!(p.heads[0].weights.len(), 10);
        assert_eq!(p.gates[0].len(), 5);
    }

    #[test]
    fn flat_indexing_matches_chunks() {
        let mut p = Params::new(2);
        p.grow_hidden(2);
        p.add_task(1);
        for i in 0..p.len() {
            p.set_flat(i, i as f64);
        }
        assert_eq!(p.flatten(), (0..p.len()).map(|i| i as f64).collect::<Vec<_>>());
        assert_eq!(p.get_flat(5), 5.0);
    }

    #[test]
    fn conform_pads_with_zeros() {
        let mut big = Params::new(2);
        big.grow_hidden(3);
        big.add_task(1);
        big.add_task(1);
        let mut small = Params::new(2);
        small.grow_hidden(1);
        small.add_task(1);
        small.w_in.fill(1.0);
        small.conform_to(&big);
        assert!(small.same_shape(&big));
        assert_eq!(small.w_in, vec![1.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
    }
}
