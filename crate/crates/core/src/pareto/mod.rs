//! Gate filtering, dominance, Pareto frontier and NES scoring over
//! `(Perf ↑, RD ↓, GCR ↓)`.

mod table;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::GATE_THRESHOLD;
use crate::plasticity::{Flags, Mechanism};

pub use table::{read_table, render_table, table1_fixture, write_table, TableRow, TABLE1_CSV};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemPoint {
    pub name: String,
    pub perf: f64,
    pub sigma: f64,
    pub rd: f64,
    pub gcr: f64,
    /// `None` when unknown; such systems are treated as gate-passing.
    pub gate_pass_rate: Option<f64>,
    pub time_min: f64,
}

/// Frontier membership of one system.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Frontier,
    Dominated(Vec<String>),
    Excluded,
    /// Missing cells or metrics; kept out of the analysis.
    Partial,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Frontier => f.write_str("frontier"),
            Status::Dominated(by) => write!(f, "dominated({})", by.join(";")),
            Status::Excluded => f.write_str("excluded"),
            Status::Partial => f.write_str("partial"),
        }
    }
}

impl FromStr for Status {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "frontier" => Ok(Status::Frontier),
            "excluded" => Ok(Status::Excluded),
            "partial" => Ok(Status::Partial),
            other => other
                .strip_prefix("dominated(")
                .and_then(|r| r.strip_suffix(')'))
                .map(|inner| {
                    Status::Dominated(
                        inner
                            .split(';')
                            .map(str::trim)
                            .filter(|n| !n.is_empty())
                            .map(String::from)
                            .collect(),
                    )
                })
                .ok_or_else(|| Error::Parse(format!("status `{other}`"))),
        }
    }
}

/// `a` is at least as good on every objective and strictly better on one.
pub fn dominates(a: &SystemPoint, b: &SystemPoint) -> bool {
    let no_worse = a.perf >= b.perf && a.rd <= b.rd && a.gcr <= b.gcr;
    let better = a.perf > b.perf || a.rd < b.rd || a.gcr < b.gcr;
    no_worse && better
}

/// Per-objective normalisation: `q = (v − worst') / (best − worst')` where
/// `worst'` is the worst observed value pushed out by 5% of the range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub best: f64,
    pub reference: f64,
}

impl Bounds {
    pub const MARGIN: f64 = 0.05;

    fn of(values: impl Iterator<Item = f64> + Clone, maximize: bool) -> Self {
        let lo = values.clone().fold(f64::INFINITY, f64::min);
        let hi = values.fold(f64::NEG_INFINITY, f64::max);
        let margin = Self::MARGIN * (hi - lo);
        if maximize {
            Self {
                best: hi,
                reference: lo - margin,
            }
        } else {
            Self {
                best: lo,
                reference: hi + margin,
            }
        }
    }

    pub fn quality(&self, v: f64) -> f64 {
        if self.best == self.reference {
            return 1.0;
        }
        ((v - self.reference) / (self.best - self.reference)).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NesBounds {
    pub perf: Bounds,
    pub rd: Bounds,
    pub gcr: Bounds,
}

impl NesBounds {
    pub fn of(points: &[SystemPoint]) -> Self {
        Self {
            perf: Bounds::of(points.iter().map(|p| p.perf), true),
            rd: Bounds::of(points.iter().map(|p| p.rd), false),
            gcr: Bounds::of(points.iter().map(|p| p.gcr), false),
        }
    }

    pub fn score(&self, p: &SystemPoint) -> f64 {
        100.0 * self.perf.quality(p.perf) * self.rd.quality(p.rd) * self.gcr.quality(p.gcr)
    }
}

/// Normalised dominated-box volume of each system, in `[0, 100]`.
pub fn nes(points: &[SystemPoint]) -> Vec<f64> {
    if points.is_empty() {
        return Vec::new();
    }
    let bounds = NesBounds::of(points);
    points.iter().map(|p| bounds.score(p)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoReport {
    pub included: Vec<String>,
    pub excluded: Vec<String>,
    /// `(dominator, dominated)` pairs over the included set.
    pub edges: Vec<(String, String)>,
    pub frontier: Vec<String>,
    pub status: BTreeMap<String, Status>,
    pub nes: BTreeMap<String, f64>,
    pub bounds: Option<NesBounds>,
    pub points: Vec<SystemPoint>,
    /// Disagreements between computed and previously published status.
    pub discrepancies: Vec<String>,
    #[serde(default)]
    pub recommendation: Option<Recommendation>,
}

impl ParetoReport {
    pub fn dominators(&self, name: &str) -> Vec<&str> {
        self.edges
            .iter()
            .filter(|(_, d)| d == name)
            .map(|(a, _)| a.as_str())
            .collect()
    }

    pub fn point(&self, name: &str) -> Option<&SystemPoint> {
        self.points.iter().find(|p| p.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn passes(p: &SystemPoint, threshold: f64) -> bool {
    p.gate_pass_rate.is_none_or(|g| g >= threshold)
}

fn complete(p: &SystemPoint) -> bool {
    p.perf.is_finite() && p.rd.is_finite() && p.gcr.is_finite()
}

/// Excludes sub-gate and incomplete systems and runs an exhaustive pairwise
/// dominance check over the rest.
pub fn frontier(points: &[SystemPoint], gate_threshold: f64) -> ParetoReport {
    let mut status = BTreeMap::new();
    let mut included = Vec::new();
    let mut excluded = Vec::new();
    for p in points {
        if !passes(p, gate_threshold) {
            excluded.push(p.name.clone());
            status.insert(p.name.clone(), Status::Excluded);
        } else if !complete(p) {
            excluded.push(p.name.clone());
            status.insert(p.name.clone(), Status::Partial);
        } else {
            included.push(p.clone());
        }
    }
    let mut edges = Vec::new();
    let mut frontier = Vec::new();
    for b in &included {
        let by: Vec<String> = included
            .iter()
            .filter(|a| dominates(a, b))
            .map(|a| a.name.clone())
            .collect();
        edges.extend(by.iter().map(|a| (a.clone(), b.name.clone())));
        if by.is_empty() {
            frontier.push(b.name.clone());
            status.insert(b.name.clone(), Status::Frontier);
        } else {
            status.insert(b.name.clone(), Status::Dominated(by));
        }
    }
    let scores = nes(&included);
    let nes = included.iter().zip(scores).map(|(p, s)| (p.name.clone(), s)).collect();
    ParetoReport {
        included: included.iter().map(|p| p.name.clone()).collect(),
        excluded,
        edges,
        frontier,
        status,
        nes,
        bounds: (!included.is_empty()).then(|| NesBounds::of(&included)),
        points: points.to_vec(),
        discrepancies: Vec::new(),
        recommendation: None,
    }
}

/// [`frontier`] with the default gate threshold.
pub fn analyze(points: &[SystemPoint]) -> ParetoReport {
    frontier(points, GATE_THRESHOLD)
}

/// Records a note for every system whose computed status differs from a
/// previously published one. Dominator lists are compared as sets.
pub fn compare_published(report: &mut ParetoReport, published: &BTreeMap<String, Status>) {
    for (name, claimed) in published {
        let Some(computed) = report.status.get(name) else {
            continue;
        };
        let same = match (computed, claimed) {
            (Status::Dominated(a), Status::Dominated(b)) => {
                let mut a = a.clone();
                let mut b = b.clone();
                a.sort();
                b.sort();
                a == b
            }
            (a, b) => a == b,
        };
        if !same {
            report
                .discrepancies
                .push(format!("{name}: published `{claimed}`, computed `{computed}`"));
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub remove: Vec<Mechanism>,
    /// Single-ablation systems the recommendation is based on.
    pub evidence: Vec<String>,
    /// Reference flags with every recommended mechanism turned off.
    pub flags: Flags,
}

/// Finds mechanisms whose single-ablation system is dominated while not
/// losing Perf against the reference, and proposes removing them jointly.
///
/// `configs` maps system names to their flags; `reference` names the
/// all-mechanisms system.
pub fn efficiency_analysis(
    report: &ParetoReport,
    configs: &BTreeMap<String, Flags>,
    reference: &str,
) -> Result<Recommendation> {
    let ref_flags = *configs
        .get(reference)
        .ok_or_else(|| Error::UnknownConfig(reference.to_string()))?;
    let ref_perf = report
        .point(reference)
        .map(|p| p.perf)
        .ok_or_else(|| Error::UnknownConfig(reference.to_string()))?;
    let mut remove = Vec::new();
    let mut evidence = Vec::new();
    for (name, flags) in configs {
        let removed = flags.removed_relative_to(&ref_flags);
        let [m] = removed.as_slice() else {
            continue;
        };
        if *flags != ref_flags.without(*m) {
            continue;
        }
        let dominated = matches!(report.status.get(name), Some(Status::Dominated(_)));
        let perf = report.point(name).map_or(f64::NEG_INFINITY, |p| p.perf);
        if dominated && perf >= ref_perf {
            remove.push(*m);
            evidence.push(name.clone());
        }
    }
    remove.sort();
    let flags = remove.iter().fold(ref_flags, |f, &m| f.without(m));
    Ok(Recommendation {
        remove,
        evidence,
        flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn pt(name: &str, perf: f64, rd: f64, gcr: f64) -> SystemPoint {
        SystemPoint {
            name: name.into(),
            perf,
            sigma: 0.0,
            rd,
            gcr,
            gate_pass_rate: None,
            time_min: 0.0,
        }
    }

    #[test]
    fn published_dominance_pairs() {
        let no_imp = pt("no_importance", 0.9079, 0.41081, 2.08);
        let no_ewc = pt("no_ewc", 0.9070, 0.42588, 2.14);
        assert!(dominates(&no_imp, &no_ewc));
        let no_prun = pt("no_pruning", 0.8996, 0.40639, 1.88);
        let no_gate = pt("no_gating", 0.8866, 0.56361, 1.97);
        assert!(dominates(&no_prun, &no_gate));
        assert!(!dominates(&no_imp, &no_imp));
    }

    #[test]
    fn single_point() {
        let r = analyze(&[pt("a", 0.5, 0.5, 1.0)]);
        assert_eq!(r.frontier, vec!["a"]);
        assert_eq!(r.nes["a"], 100.0);
    }

    #[test]
    fn best_everywhere_scores_100() {
        let r = analyze(&[pt("a", 0.9, 0.1, 1.0), pt("b", 0.8, 0.3, 2.0)]);
        assert_eq!(r.nes["a"], 100.0);
        assert!(r.nes["b"] < 100.0 && r.nes["b"] > 0.0);
        assert_eq!(r.status["b"], Status::Dominated(vec!["a".into()]));
    }

    #[test]
    fn ties_are_not_dominance() {
        let r = analyze(&[pt("a", 0.9, 0.1, 1.0), pt("b", 0.9, 0.1, 1.0)]);
        assert_eq!(r.frontier.len(), 2);
    }

    #[test]
    fn gate_and_missing_metrics_exclude() {
        let mut low = pt("low", 0.99, 0.0, 0.0);
        low.gate_pass_rate = Some(0.5);
        let partial = pt("partial", 0.99, f64::NAN, 0.0);
        let r = analyze(&[low, partial, pt("ok", 0.5, 0.5, 5.0)]);
        assert_eq!(r.status["low"], Status::Excluded);
        assert_eq!(r.status["partial"], Status::Partial);
        assert_eq!(r.frontier, vec!["ok"]);
    }

    #[test]
    fn empty_report() {
        let r = analyze(&[]);
        assert!(r.included.is_empty() && r.bounds.is_none());
    }

    #[test]
    fn status_text_roundtrip() {
        for s in [
            Status::Frontier,
            Status::Excluded,
            Status::Partial,
            Status::Dominated(vec!["x".into(), "y".into()]),
        ] {
            assert_eq!(s.to_string().parse::<Status>().unwrap(), s);
        }
        assert!("bogus".parse::<Status>().is_err());
    }

    #[test]
    fn efficiency_single_component() {
        let full = Flags::all_on();
        let configs: BTreeMap<String, Flags> = [
            ("full".to_string(), full),
            ("no_pruning".to_string(), full.without(Mechanism::Pruning)),
            ("no_replay".to_string(), full.without(Mechanism::Replay)),
        ]
        .into();
        let r = analyze(&[
            pt("full", 0.90, 0.40, 2.0),
            pt("no_pruning", 0.91, 0.45, 2.1),
            pt("no_replay", 0.92, 0.30, 1.0),
        ]);
        let rec = efficiency_analysis(&r, &configs, "full").unwrap();
        assert_eq!(rec.remove, vec![Mechanism::Pruning]);
        assert_eq!(rec.flags, full.without(Mechanism::Pruning));
    }

    #[test]
    fn efficiency_none_when_all_on_frontier() {
        let full = Flags::all_on();
        let configs: BTreeMap<String, Flags> = [
            ("full".to_string(), full),
            ("no_pruning".to_string(), full.without(Mechanism::Pruning)),
        ]
        .into();
        let r = analyze(&[pt("full", 0.90, 0.40, 2.0), pt("no_pruning", 0.91, 0.45, 1.0)]);
        let rec = efficiency_analysis(&r, &configs, "full").unwrap();
        assert!(rec.remove.is_empty());
        assert_eq!(rec.flags, full);
    }
}
