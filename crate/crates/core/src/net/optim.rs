use serde::{Deserialize, Serialize};

use super::params::{Gradients, Params};

/// Adaptive-moment gradient descent over a [`Params`] layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    step: u64,
    m: Option<Params>,
    v: Option<Params>,
}

impl Default for Adam {
    fn default() -> Self {
        Self::new(1e-2)
    }
}

impl Adam {
    pub fn new(lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            m: None,
            v: None,
        }
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    /// Clears moments and the step counter.
    pub fn reset(&mut self) {
        self.step = 0;
        self.m = None;
        self.v = None;
    }

    /// One update. Rows flagged in `frozen` (input weights and bias of hidden
    /// units) are left untouched regardless of gradient or momentum.
    pub fn step(&mut self, params: &mut Params, grads: &Gradients, frozen: &[bool]) {
        assert!(params.same_shape(grads), "gradient shape differs from parameters");
        let m = self.m.get_or_insert_with(|| params.zeros_like());
        let v = self.v.get_or_insert_with(|| params.zeros_like());
        m.conform_to(params);
        v.conform_to(params);
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        let (b1, b2, lr, eps) = (self.beta1, self.beta2, self.lr, self.eps);
        let update = |p: &mut f64, g: f64, m: &mut f64, v: &mut f64| {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= lr * m_hat / (v_hat.sqrt() + eps);
        };

        let d = params.input_dim;
        for i in 0..params.hidden {
            if frozen.get(i).copied().unwrap_or(false) {
                continue;
            }
            for j in i * d..(i + 1) * d {
                update(&mut params.w_in[j], grads.w_in[j], &mut m.w_in[j], &mut v.w_in[j]);
            }
            update(&mut params.bias[i], grads.bias[i], &mut m.bias[i], &mut v.bias[i]);
        }
        let pc = params.chunks_mut();
        let gc = grads.chunks();
        let mc = m.chunks_mut();
        let vc = v.chunks_mut();
        for (((p, g), mm), vv) in pc.into_iter().zip(gc).zip(mc).zip(vc).skip(2) {
            for k in 0..p.len() {
                update(&mut p[k], g[k], &mut mm[k], &mut vv[k]);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut p = Params::new(1);
        p.grow_hidden(1);
        p.add_task(1);
        let mut g = p.zeros_like();
        g.w_in[0] = 3.0;
        g.heads[0].bias[0] = -0.5;
        let mut opt = Adam::new(0.01);
        opt.step(&mut p, &g, &[false]);
        assert!((p.w_in[0] + 0.01).abs() < 1e-9);
        assert!((p.heads[0].bias[0] - 0.01).abs() < 1e-9);
    }

    #[test]
    fn frozen_rows_are_skipped() {
        let mut p = Params::new(2);
        p.grow_hidden(2);
        let mut g = p.zeros_like();
        g.fill(1.0);
        let mut opt = Adam::new(0.1);
        opt.step(&mut p, &g, &[true, false]);
        assert_eq!(&p.w_in[..2], &[0.0, 0.0]);
        assert_eq!(p.bias[0], 0.0);
        assert!(p.w_in[2] < 0.0 && p.bias[1] < 0.0);
    }

    #[test]
    fn moments_follow_growth() {
        let mut p = Params::new(1);
        p.grow_hidden(1);
        let mut opt = Adam::default();
        let g = p.zeros_like();
        opt.step(&mut p, &g, &[]);
        p.grow_hidden(2);
        p.add_task(1);
        let g = p.zeros_like();
        opt.step(&mut p, &g, &[]);
        assert_eq!(opt.steps(), 2);
    }
}
