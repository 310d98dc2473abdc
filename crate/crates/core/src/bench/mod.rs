//! Seeded procedural generators for the four benchmark tracks.

mod io;
mod similarity;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net::LossKind;
use crate::rng::Stream;

pub use io::{read_dataset, read_track, write_dataset, write_track};
pub use similarity::{task_similarity_matrix, SimilarityMatrix};

/// Raw input width shared by every track.
pub const INPUT_DIM: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Track {
    #[serde(rename = "B1")]
    B1,
    #[serde(rename = "B4")]
    B4,
    #[serde(rename = "B_LOGIC")]
    BLogic,
    #[serde(rename = "B_MIXED")]
    BMixed,
}

impl Track {
    pub const ALL: [Track; 4] = [Track::B1, Track::B4, Track::BLogic, Track::BMixed];

    pub fn name(self) -> &'static str {
        match self {
            Track::B1 => "B1",
            Track::B4 => "B4",
            Track::BLogic => "B_LOGIC",
            Track::BMixed => "B_MIXED",
        }
    }

    pub fn task_count(self) -> usize {
        match self {
            Track::B1 => 8,
            Track::B4 => 5,
            Track::BLogic => 8,
            Track::BMixed => 10,
        }
    }
}

impl fmt::Display for Track {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Track {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Track::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownTrack(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gate {
    And,
    Or,
    Xor,
    Nand,
    Nor,
    Xnor,
    /// `(a ∧ b) ∨ c`
    AndOr,
    /// `(a ⊕ b) ∧ c`
    XorAnd,
}

impl Gate {
    pub const ALL: [Gate; 8] = [
        Gate::And,
        Gate::Or,
        Gate::Xor,
        Gate::Nand,
        Gate::Nor,
        Gate::Xnor,
        Gate::AndOr,
        Gate::XorAnd,
    ];

    pub fn arity(self) -> usize {
        match self {
            Gate::AndOr | Gate::XorAnd => 3,
            _ => 2,
        }
    }

    pub fn eval(self, bits: &[bool]) -> bool {
        let (a, b) = (bits[0], bits[1]);
        match self {
            Gate::And => a && b,
            Gate::Or => a || b,
            Gate::Xor => a ^ b,
            Gate::Nand => !(a && b),
            Gate::Nor => !(a || b),
            Gate::Xnor => !(a ^ b),
            Gate::AndOr => (a && b) || bits[2],
            Gate::XorAnd => (a ^ b) && bits[2],
        }
    }

    /// Every input row of the truth table with its output.
    pub fn truth_table(self) -> Vec<(Vec<bool>, bool)> {
        let n = self.arity();
        (0..1usize << n)
            .map(|code| {
                let bits: Vec<bool> = (0..n).map(|k| code >> (n - 1 - k) & 1 == 1).collect();
                let y = self.eval(&bits);
                (bits, y)
            })
            .collect()
    }
}

/// Resolved generator of one task.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum TaskGenerator {
    /// `y = sin(2π f x₁ + ϕ)`, `x₁ ~ U[−1, 1]`, other inputs zero.
    Sine { frequency: f64, phase: f64 },
    /// `y = 1[x_i x_j > 0]`, `x ~ N(0, s² I)`; indices are zero-based.
    Interaction { i: usize, j: usize },
    /// Boolean gate on the first input bits with Gaussian jitter.
    Logic { gate: Gate },
}

impl TaskGenerator {
    pub fn kind(&self) -> LossKind {
        match self {
            TaskGenerator::Sine { .. } => LossKind::Regression,
            _ => LossKind::Classification,
        }
    }
}

/// Sampling constants shared by all tracks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchParams {
    pub train: usize,
    pub test: usize,
    /// Gaussian jitter on Boolean inputs.
    pub jitter: f64,
    /// Standard deviation of interaction-task inputs.
    pub interaction_std: f64,
    /// Label balance window for classification tasks.
    pub min_positive: f64,
    pub max_positive: f64,
    pub max_retries: usize,
}

impl Default for BenchParams {
    fn default() -> Self {
        Self {
            train: 256,
            test: 256,
            jitter: 0.1,
            interaction_std: 0.1,
            min_positive: 0.3,
            max_positive: 0.7,
            max_retries: 64,
        }
    }
}

/// A track and the unresolved per-task generator families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackSpec {
    pub track: Track,
    pub params: BenchParams,
}

impl TrackSpec {
    pub fn new(track: Track) -> Self {
        Self {
            track,
            params: BenchParams::default(),
        }
    }

    /// Generator family for each task; sine phases are filled in from `seed`.
    pub fn generators(&self, seed: u64) -> Vec<TaskGenerator> {
        let sine = |k: usize, task: usize| TaskGenerator::Sine {
            frequency: 0.5 * k as f64,
            phase: phase(seed, self.track, task),
        };
        let pairs = [(0, 1), (2, 3), (4, 5), (6, 7), (0, 4)];
        match self.track {
            Track::B1 => (0..8).map(|t| sine(t + 1, t)).collect(),
            Track::B4 => pairs
                .iter()
                .map(|&(i, j)| TaskGenerator::Interaction { i, j })
                .collect(),
            Track::BLogic => Gate::ALL.iter().map(|&gate| TaskGenerator::Logic { gate }).collect(),
            Track::BMixed => {
                let classification = [
                    TaskGenerator::Interaction { i: 0, j: 1 },
                    TaskGenerator::Logic { gate: Gate::Xor },
                    TaskGenerator::Interaction { i: 2, j: 3 },
                    TaskGenerator::Logic { gate: Gate::AndOr },
                    TaskGenerator::Interaction { i: 0, j: 4 },
                ];
                (0..10)
                    .map(|t| {
                        if t % 2 == 0 {
                            sine(t / 2 + 1, t)
                        } else {
                            classification[t / 2]
                        }
                    })
                    .collect()
            }
        }
    }
}

fn phase(seed: u64, track: Track, task: usize) -> f64 {
    Stream::new(seed, &format!("bench/{track}/task{task}/phase")).uniform_range(0.0, 2.0 * std::f64::consts::PI)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskDataset {
    pub track: Track,
    pub task: usize,
    pub kind: LossKind,
    pub generator: TaskGenerator,
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<Vec<f64>>,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    /// Seed the samples were drawn with, after any balance retries.
    pub seed: u64,
}

impl TaskDataset {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.inputs.first().map_or(INPUT_DIM, Vec::len)
    }

    pub fn output_dim(&self) -> usize {
        self.targets.first().map_or(1, Vec::len)
    }

    pub fn split(&self, indices: &[usize]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        indices
            .iter()
            .map(|&i| (self.inputs[i].clone(), self.targets[i].clone()))
            .unzip()
    }

    pub fn train_split(&self) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        self.split(&self.train)
    }

    pub fn test_split(&self) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        self.split(&self.test)
    }

    pub fn positive_fraction(&self) -> f64 {
        let pos = self.targets.iter().filter(|t| t[0] > 0.5).count();
        pos as f64 / self.targets.len() as f64
    }
}

/// Derives the sample seed of a task; retry `r` uses a distinct sub-seed.
pub fn task_seed(seed: u64, track: Track, task: usize, retry: usize) -> u64 {
    Stream::new(seed, &format!("bench/{track}/task{task}/seed{retry}")).next_u64()
}

fn sample(generator: TaskGenerator, params: &BenchParams, rng: &mut Stream) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; INPUT_DIM];
    match generator {
        TaskGenerator::Sine { frequency, phase } => {
            x[0] = rng.uniform_range(-1.0, 1.0);
            let y = (2.0 * std::f64::consts::PI * frequency * x[0] + phase).sin();
            (x, vec![y])
        }
        TaskGenerator::Interaction { i, j } => {
            for v in &mut x {
                *v = params.interaction_std * rng.normal();
            }
            let y = if x[i] * x[j] > 0.0 { 1.0 } else { 0.0 };
            (x, vec![y])
        }
        TaskGenerator::Logic { gate } => {
            // Draw the label first, then a truth-table row carrying it, so
            // skewed gates such as AND stay class-balanced.
            let want = rng.bernoulli(0.5);
            let rows: Vec<Vec<bool>> = gate
                .truth_table()
                .into_iter()
                .filter(|(_, y)| *y == want)
                .map(|(bits, _)| bits)
                .collect();
            let bits = &rows[rng.below(rows.len())];
            for (v, &b) in x.iter_mut().zip(bits) {
                *v = f64::from(u8::from(b)) + params.jitter * rng.normal();
            }
            (x, vec![f64::from(u8::from(want))])
        }
    }
}

fn generate_task(spec: &TrackSpec, generator: TaskGenerator, task: usize, seed: u64) -> Result<TaskDataset> {
    let p = &spec.params;
    let n = p.train + p.test;
    for retry in 0..=p.max_retries {
        let sub = task_seed(seed, spec.track, task, retry);
        let mut rng = Stream::new(sub, "samples");
        let (inputs, targets): (Vec<_>, Vec<_>) = (0..n).map(|_| sample(generator, p, &mut rng)).unzip();
        let mut order: Vec<usize> = (0..n).collect();
        rng.shuffle(&mut order);
        let mut train = order[..p.train].to_vec();
        let mut test = order[p.train..].to_vec();
        train.sort_unstable();
        test.sort_unstable();
        let ds = TaskDataset {
            track: spec.track,
            task,
            kind: generator.kind(),
            generator,
            inputs,
            targets,
            train,
            test,
            seed: sub,
        };
        if ds.kind == LossKind::Regression {
            return Ok(ds);
        }
        let frac = ds.positive_fraction();
        if (p.min_positive..=p.max_positive).contains(&frac) {
            return Ok(ds);
        }
    }
    Err(Error::Unbalanced {
        track: spec.track.to_string(),
        task,
    })
}

/// All tasks of a track, in training order. Deterministic in `(spec, seed)`.
pub fn generate_track(spec: &TrackSpec, seed: u64) -> Result<Vec<TaskDataset>> {
    spec.generators(seed)
        .into_iter()
        .enumerate()
        .map(|(t, g)| generate_task(spec, g, t, seed))
        .collect()
}
