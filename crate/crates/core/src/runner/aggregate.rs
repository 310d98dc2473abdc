//! Reduction of per-cell results to one row per configuration.

use std::collections::{BTreeMap, BTreeSet};

use super::learner::RunResult;
use crate::bench::Track;
use crate::pareto::{analyze, SystemPoint, TableRow};
use crate::stats::{mean, population_std};

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub point: SystemPoint,
    /// Some expected `(seed, track)` cells are missing.
    pub partial: bool,
    pub cells: usize,
}

/// Per configuration: metrics averaged over tracks within each seed, then
/// over seeds; σ is the population standard deviation of per-seed Perf; time
/// is the summed wall-clock; the gate rate is task-weighted over all cells.
///
/// The expected grid is every seed and track seen anywhere in `results`; a
/// configuration missing any of those cells is marked partial.
pub fn aggregate(results: &[RunResult]) -> Vec<Aggregate> {
    let seeds: BTreeSet<u64> = results.iter().map(|r| r.metrics.seed).collect();
    let tracks: BTreeSet<Track> = results.iter().map(|r| r.metrics.track).collect();
    let mut by_config: BTreeMap<&str, Vec<&RunResult>> = BTreeMap::new();
    for r in results {
        by_config.entry(r.metrics.config.as_str()).or_default().push(r);
    }
    let mut out = Vec::new();
    for (name, rs) in by_config {
        let mut per_seed: BTreeMap<u64, Vec<&RunResult>> = BTreeMap::new();
        for r in &rs {
            per_seed.entry(r.metrics.seed).or_default().push(r);
        }
        let mut perf = Vec::new();
        let mut rd = Vec::new();
        let mut gcr = Vec::new();
        for cells in per_seed.values() {
            perf.push(mean(&cells.iter().map(|r| r.metrics.perf).collect::<Vec<_>>()));
            rd.push(mean(&cells.iter().map(|r| r.metrics.rd).collect::<Vec<_>>()));
            gcr.push(mean(&cells.iter().map(|r| r.metrics.gcr).collect::<Vec<_>>()));
        }
        let (passed, total) = rs.iter().fold((0.0, 0usize), |(p, n), r| {
            let k = r.metrics.perf_per_task.len();
            (p + r.metrics.gate_pass_rate * k as f64, n + k)
        });
        let present: BTreeSet<(u64, Track)> = rs.iter().map(|r| (r.metrics.seed, r.metrics.track)).collect();
        let partial = seeds
            .iter()
            .any(|&s| tracks.iter().any(|&t| !present.contains(&(s, t))));
        out.push(Aggregate {
            point: SystemPoint {
                name: name.to_string(),
                perf: mean(&perf),
                sigma: population_std(&perf),
                rd: mean(&rd),
                gcr: mean(&gcr),
                gate_pass_rate: Some(if total == 0 { 0.0 } else { passed / total as f64 }),
                time_min: rs.iter().map(|r| r.metrics.wall_ms as f64).sum::<f64>() / 60_000.0,
            },
            partial,
            cells: rs.len(),
        });
    }
    out
}

/// Aggregate rows with NES and frontier status filled in from a Pareto
/// analysis over the complete configurations.
pub fn aggregate_table(results: &[RunResult]) -> Vec<TableRow> {
    let aggs = aggregate(results);
    let complete: Vec<SystemPoint> = aggs.iter().filter(|a| !a.partial).map(|a| a.point.clone()).collect();
    let report = analyze(&complete);
    aggs.iter()
        .map(|a| {
            let p = &a.point;
            let status = if a.partial {
                "partial".to_string()
            } else {
                report.status.get(&p.name).map(ToString::to_string).unwrap_or_default()
            };
            TableRow {
                config: p.name.clone(),
                perf: p.perf,
                sigma: p.sigma,
                rd: Some(p.rd),
                gcr: Some(p.gcr),
                nes: report.nes.get(&p.name).copied(),
                time_min: p.time_min,
                status: Some(status),
                gate_pass_rate: p.gate_pass_rate,
            }
        })
        .collect()
}
