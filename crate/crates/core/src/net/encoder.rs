use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Stream;

/// Random Fourier feature map `x ↦ [sin(Wx), cos(Wx)]` with a projection
/// drawn once from a seeded stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierEncoder {
    seed: u64,
    features: usize,
    input_dim: usize,
    scale: Option<f64>,
    /// `features × input_dim`, row-major.
    projection: Vec<f64>,
}

impl FourierEncoder {
    /// Projection entries are `scale · N(0, 1)` from the `"fourier"` stream of `seed`.
    pub fn new(seed: u64, input_dim: usize, features: usize, scale: f64) -> Self {
        let mut rng = Stream::new(seed, "fourier");
        let projection = (0..features * input_dim).map(|_| scale * rng.normal()).collect();
        Self {
            seed,
            features,
            input_dim,
            scale: Some(scale),
            projection,
        }
    }

    /// An encoder with an explicit projection matrix (`features × input_dim`).
    pub fn from_projection(projection: Vec<f64>, features: usize, input_dim: usize) -> Result<Self> {
        if projection.len() != features * input_dim {
            return Err(Error::InputShape {
                expected: features * input_dim,
                actual: projection.len(),
            });
        }
        Ok(Self {
            seed: 0,
            features,
            input_dim,
            scale: None,
            projection,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn features(&self) -> usize {
        self.features
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        2 * self.features
    }

    pub fn projection(&self) -> &[f64] {
        &self.projection
    }

    pub fn encode(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim {
            return Err(Error::InputShape {
                expected: self.input_dim,
                actual: x.len(),
            });
        }
        let k = self.features;
        let mut out = vec![0.0; 2 * k];
        for (f, row) in self.projection.chunks_exact(self.input_dim).enumerate() {
            let z: f64 = row.iter().zip(x).map(|(w, xi)| w * xi).sum();
            out[f] = z.sin();
            out[k + f] = z.cos();
        }
        Ok(out)
    }
}

/// The encoder-bypass input path: the raw vector zero-padded to `width`.
pub fn pad_raw(x: &[f64], width: usize) -> Result<Vec<f64>> {
    if x.len() > width {
        return Err(Error::InputShape {
            expected: width,
            actual: x.len(),
        });
    }
    let mut out = x.to_vec();
    out.resize(width, 0.0);
    Ok(out)
}

/// How raw inputs reach the hidden layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputPath {
    Fourier(FourierEncoder),
    /// Raw input zero-padded to `width`.
    Raw {
        width: usize,
    },
}

impl InputPath {
    pub fn width(&self) -> usize {
        match self {
            InputPath::Fourier(enc) => enc.output_dim(),
            InputPath::Raw { width } => *width,
        }
    }

    pub fn encode(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            InputPath::Fourier(enc) => enc.encode(x),
            InputPath::Raw { width } => pad_raw(x, *width),
        }
    }

    pub fn encode_all(&self, xs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        xs.iter().map(|x| self.encode(x)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn zero_input_gives_sin_zero_cos_one() {
        let enc = FourierEncoder::new(42, 8, 32, 2.0);
        let out = enc.encode(&[0.0; 8]).unwrap();
        assert_eq!(out.len(), 64);
        assert!(out[..32].iter().all(|&v| v == 0.0));
        assert!(out[32..].iter().all(|&v| v == 1.0));
    }

    #[test]
    fn quarter_turn() {
        let enc = FourierEncoder::from_projection(vec![FRAC_PI_2], 1, 1).unwrap();
        let out = enc.encode(&[1.0]).unwrap();
        assert!((out[0] - 1.0).abs() < 1e-15);
        assert!(out[1].abs() < 1e-15);
    }

    #[test]
    fn wrong_length_is_rejected() {
        let enc = FourierEncoder::new(1, 8, 4, 1.0);
        assert!(matches!(
            enc.encode(&[0.0; 3]),
            Err(Error::InputShape { expected: 8, actual: 3 })
        ));
    }

    #[test]
    fn projection_is_deterministic() {
        let a = FourierEncoder::new(9, 8, 32, 2.0);
        let b = FourierEncoder::new(9, 8, 32, 2.0);
        assert_eq!(a, b);
    }

    #[test]
    fn pad_raw_zero_extends() {
        assert_eq!(pad_raw(&[1.0, 2.0], 4).unwrap(), vec![1.0, 2.0, 0.0, 0.0]);
        assert!(pad_raw(&[1.0; 5], 4).is_err());
    }
}
