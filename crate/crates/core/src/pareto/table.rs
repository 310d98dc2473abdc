//! Aggregate table CSV and the human-readable rendering.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ParetoReport, Status, SystemPoint};
use crate::error::Result;

/// The published ablation numbers, one row per system.
pub const TABLE1_CSV: &str = include_str!("../../data/table1.csv");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub config: String,
    #[serde(rename = "Perf")]
    pub perf: f64,
    pub sigma: f64,
    #[serde(rename = "RD")]
    pub rd: Option<f64>,
    #[serde(rename = "GCR")]
    pub gcr: Option<f64>,
    #[serde(rename = "NES")]
    pub nes: Option<f64>,
    pub time_min: f64,
    pub status: Option<String>,
    pub gate_pass_rate: Option<f64>,
}

impl TableRow {
    pub fn point(&self) -> SystemPoint {
        SystemPoint {
            name: self.config.clone(),
            perf: self.perf,
            sigma: self.sigma,
            rd: self.rd.unwrap_or(f64::NAN),
            gcr: self.gcr.unwrap_or(f64::NAN),
            gate_pass_rate: self.gate_pass_rate,
            time_min: self.time_min,
        }
    }

    pub fn parsed_status(&self) -> Result<Option<Status>> {
        self.status
            .as_deref()
            .filter(|s| !s.is_empty())
            .map(str::parse)
            .transpose()
    }
}

pub fn parse_table(text: &str) -> Result<Vec<TableRow>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    Ok(reader.deserialize().collect::<std::result::Result<_, _>>()?)
}

pub fn read_table(path: &Path) -> Result<Vec<TableRow>> {
    parse_table(&std::fs::read_to_string(path)?)
}

pub fn write_table(path: &Path, rows: &[TableRow]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    for r in rows {
        writer.serialize(r)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn table1_fixture() -> Vec<TableRow> {
    parse_table(TABLE1_CSV).expect("bundled fixture parses")
}

fn opt(v: Option<f64>, digits: usize) -> String {
    v.filter(|x| x.is_finite())
        .map_or_else(|| "-".to_string(), |x| format!("{x:.digits$}"))
}

/// Fixed-width table with Perf, σ, RD, GCR, NES, Time and Status columns.
pub fn render_table(report: &ParetoReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<24} {:>7} {:>6} {:>8} {:>6} {:>6} {:>8}  Status",
        "Configuration", "Perf", "sigma", "RD", "GCR", "NES", "Time"
    );
    for p in &report.points {
        let status = report
            .status
            .get(&p.name)
            .map_or_else(|| "-".to_string(), Status::to_string);
        let _ = writeln!(
            out,
            "{:<24} {:>7} {:>6} {:>8} {:>6} {:>6} {:>8}  {}",
            p.name,
            opt(Some(p.perf), 4),
            opt(Some(p.sigma), 3),
            opt(Some(p.rd), 5),
            opt(Some(p.gcr), 2),
            opt(report.nes.get(&p.name).copied(), 1),
            opt(Some(p.time_min), 1),
            status
        );
    }
    if let Some(rec) = &report.recommendation {
        let names: Vec<&str> = rec.remove.iter().map(|m| m.name()).collect();
        if names.is_empty() {
            out.push_str("\nNo dominated single-ablation component to remove.\n");
        } else {
            let _ = writeln!(
                out,
                "\nJointly removable (dominated single ablations {}): {}",
                rec.evidence.join(", "),
                names.join(" + ")
            );
        }
    }
    if !report.discrepancies.is_empty() {
        out.push_str("\nDiscrepancies:\n");
        for d in &report.discrepancies {
            let _ = writeln!(out, "  {d}");
        }
    }
    out
}
