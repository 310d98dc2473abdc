//! Resumable parallel execution of the configuration × seed × track matrix.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::learner::{run_cell, RunResult, RunSettings};
use crate::bench::Track;
use crate::error::{Error, Result};
use crate::plasticity::MechanismConfig;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Cell {
    pub config: String,
    pub seed: u64,
    pub track: Track,
}

impl Cell {
    pub fn file_name(&self) -> String {
        format!("{}__{}__s{}.json", self.config, self.track, self.seed)
    }

    pub fn error_file_name(&self) -> String {
        format!("{}__{}__s{}.error.json", self.config, self.track, self.seed)
    }
}

/// Diagnostic written in place of a result when a cell fails.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub config: String,
    pub seed: u64,
    pub track: Track,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CellOutcome {
    Skipped,
    Completed,
    Failed(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MatrixSummary {
    pub completed: Vec<Cell>,
    pub skipped: Vec<Cell>,
    pub failed: Vec<(Cell, String)>,
}

/// Writes `contents` to a sibling temporary file, then renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn cells(configs: &[MechanismConfig], seeds: &[u64], tracks: &[Track]) -> Vec<Cell> {
    let mut out = Vec::new();
    for c in configs {
        for &seed in seeds {
            for &track in tracks {
                out.push(Cell {
                    config: c.name.clone(),
                    seed,
                    track,
                });
            }
        }
    }
    out
}

fn run_one(config: &MechanismConfig, settings: &RunSettings, cell: &Cell, out: &Path) -> Result<CellOutcome> {
    let path = out.join(cell.file_name());
    if path.exists() {
        return Ok(CellOutcome::Skipped);
    }
    let err_path = out.join(cell.error_file_name());
    match run_cell(config, settings, cell.track, cell.seed, &BTreeSet::new()) {
        Ok(result) => {
            write_atomic(&path, &result.to_json()?)?;
            if err_path.exists() {
                fs::remove_file(&err_path)?;
            }
            Ok(CellOutcome::Completed)
        }
        Err(e) => {
            let failure = CellFailure {
                config: cell.config.clone(),
                seed: cell.seed,
                track: cell.track,
                error: e.to_string(),
            };
            write_atomic(&err_path, &serde_json::to_string_pretty(&failure)?)?;
            Ok(CellOutcome::Failed(e.to_string()))
        }
    }
}

/// Runs every cell not already present in `out` on up to `workers` threads.
/// Each result is written as soon as its cell finishes; failing cells leave
/// an error record and do not stop the matrix.
pub fn run_matrix(
    configs: &[MechanismConfig],
    seeds: &[u64],
    tracks: &[Track],
    settings: &RunSettings,
    out: &Path,
    workers: usize,
) -> Result<MatrixSummary> {
    fs::create_dir_all(out)?;
    let all = cells(configs, seeds, tracks);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let outcomes: Vec<(Cell, Result<CellOutcome>)> = pool.install(|| {
        all.into_par_iter()
            .map(|cell| {
                let config = configs
                    .iter()
                    .find(|c| c.name == cell.config)
                    .expect("cell built from configs");
                let outcome = run_one(config, settings, &cell, out);
                (cell, outcome)
            })
            .collect()
    });
    let mut summary = MatrixSummary::default();
    for (cell, outcome) in outcomes {
        match outcome? {
            CellOutcome::Skipped => summary.skipped.push(cell),
            CellOutcome::Completed => summary.completed.push(cell),
            CellOutcome::Failed(e) => summary.failed.push((cell, e)),
        }
    }
    Ok(summary)
}

/// Every result file in `dir`, sorted by file name. Error records and
/// temporary files are ignored.
pub fn load_results(dir: &Path) -> Result<Vec<RunResult>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
            name.ends_with(".json") && !name.ends_with(".error.json")
        })
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| RunResult::from_json(&fs::read_to_string(p)?))
        .collect()
}

/// Failure records in `dir`.
pub fn load_failures(dir: &Path) -> Result<Vec<CellFailure>> {
    let mut out = Vec::new();
    for e in fs::read_dir(dir)? {
        let p = e?.path();
        if p.to_str().is_some_and(|s| s.ends_with(".error.json")) {
            out.push(serde_json::from_str(&fs::read_to_string(&p)?)?);
        }
    }
    Ok(out)
}
