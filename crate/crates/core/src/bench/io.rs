//! Columnar text format.
//!
//! ```text
//! track task kind n d d_out seed
//! B1 0 regression 512 8 1 1234
//! train 0.25 0 0 0 0 0 0 0 0.7071
//! test ...
//! ```
//!
//! The first line names the header fields, the second gives their values,
//! and each following line is one sample: split, `d` inputs, `d_out` targets.
//! Floats are written in shortest round-trip form so reading is bit-exact.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{generate_track, TaskDataset, TaskGenerator, Track, TrackSpec};
use crate::error::{Error, Result};
use crate::net::LossKind;

const HEADER: &str = "track task kind n d d_out seed";

pub fn format_dataset(ds: &TaskDataset) -> String {
    let kind = match ds.kind {
        LossKind::Regression => "regression",
        LossKind::Classification => "classification",
    };
    let mut out = String::new();
    let _ = writeln!(out, "{HEADER}");
    let _ = writeln!(
        out,
        "{} {} {} {} {} {} {}",
        ds.track,
        ds.task,
        kind,
        ds.len(),
        ds.input_dim(),
        ds.output_dim(),
        ds.seed
    );
    let mut split = vec!["test"; ds.len()];
    for &i in &ds.train {
        split[i] = "train";
    }
    for (i, (x, y)) in ds.inputs.iter().zip(&ds.targets).enumerate() {
        out.push_str(split[i]);
        for v in x.iter().chain(y) {
            let _ = write!(out, " {v}");
        }
        out.push('\n');
    }
    out
}

/// Parses a dataset. The generator is not stored in the file; it is
/// recovered from the track definition and `generator_seed`.
pub fn parse_dataset(text: &str, generator_seed: Option<u64>) -> Result<TaskDataset> {
    let bad = |m: &str| Error::Parse(m.to_string());
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(HEADER) {
        return Err(bad("missing header"));
    }
    let values: Vec<&str> = lines
        .next()
        .ok_or_else(|| bad("missing header values"))?
        .split_whitespace()
        .collect();
    if values.len() != 7 {
        return Err(bad("header values"));
    }
    let num = |s: &str| s.parse::<u64>().map_err(|_| bad("integer field"));
    let track: Track = values[0].parse()?;
    let task = num(values[1])? as usize;
    let kind = match values[2] {
        "regression" => LossKind::Regression,
        "classification" => LossKind::Classification,
        _ => return Err(bad("kind")),
    };
    let n = num(values[3])? as usize;
    let d = num(values[4])? as usize;
    let d_out = num(values[5])? as usize;
    let seed = num(values[6])?;
    let mut inputs = Vec::with_capacity(n);
    let mut targets = Vec::with_capacity(n);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (i, line) in lines.filter(|l| !l.trim().is_empty()).enumerate() {
        let mut fields = line.split_whitespace();
        match fields.next() {
            Some("train") => train.push(i),
            Some("test") => test.push(i),
            _ => return Err(bad("split column")),
        }
        let vals = fields
            .map(|f| f.parse::<f64>().map_err(|_| bad("float")))
            .collect::<Result<Vec<_>>>()?;
        if vals.len() != d + d_out {
            return Err(bad("row width"));
        }
        inputs.push(vals[..d].to_vec());
        targets.push(vals[d..].to_vec());
    }
    if inputs.len() != n {
        return Err(bad("row count"));
    }
    let generator = match generator_seed {
        Some(s) => *TrackSpec::new(track)
            .generators(s)
            .get(task)
            .ok_or(Error::UnknownTask(task))?,
        None => match kind {
            LossKind::Regression => TaskGenerator::Sine {
                frequency: f64::NAN,
                phase: f64::NAN,
            },
            LossKind::Classification => TaskGenerator::Interaction { i: 0, j: 0 },
        },
    };
    Ok(TaskDataset {
        track,
        task,
        kind,
        generator,
        inputs,
        targets,
        train,
        test,
        seed,
    })
}

fn file_name(track: Track, task: usize) -> String {
    format!("{track}_task{task:02}.txt")
}

pub fn write_dataset(dir: &Path, ds: &TaskDataset) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(file_name(ds.track, ds.task));
    fs::write(&path, format_dataset(ds))?;
    Ok(path)
}

pub fn read_dataset(path: &Path, generator_seed: Option<u64>) -> Result<TaskDataset> {
    parse_dataset(&fs::read_to_string(path)?, generator_seed)
}

/// Generates and writes every task of `track`.
pub fn write_track(dir: &Path, track: Track, seed: u64) -> Result<Vec<PathBuf>> {
    generate_track(&TrackSpec::new(track), seed)?
        .iter()
        .map(|ds| write_dataset(dir, ds))
        .collect()
}

pub fn read_track(dir: &Path, track: Track, seed: u64) -> Result<Vec<TaskDataset>> {
    (0..track.task_count())
        .map(|t| read_dataset(&dir.join(file_name(track, t)), Some(seed)))
        .collect()
}
