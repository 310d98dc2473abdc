mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::process::ExitCode;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use common::{check_table1, finite_difference_mismatch, frozen_row_hashes, random_batch, random_net};
use mpcs::bench::{generate_track, Track, TrackSpec};
use mpcs::metrics::GATE_THRESHOLD;
use mpcs::net::LossKind;
use mpcs::pareto::{analyze, dominates, nes, Status, SystemPoint};
use mpcs::plasticity::{EwcMode, Mechanism};
use mpcs::rng::Stream;
use mpcs::runner::{aggregate, config, load_results, run_cell, run_matrix, Learner, RunResult, RunSettings};

const SEEDS: [u64; 3] = [0, 1, 2];

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

/// Aggregated point of one config restricted to `tracks`.
fn point(results: &[RunResult], name: &str, tracks: &[Track]) -> Option<SystemPoint> {
    let subset: Vec<RunResult> = results
        .iter()
        .filter(|r| r.metrics.config == name && tracks.contains(&r.metrics.track))
        .cloned()
        .collect();
    if subset.len() != SEEDS.len() * tracks.len() {
        return None;
    }
    aggregate(&subset).pop().map(|a| a.point)
}

fn c1_table() -> Verdict {
    let started = Instant::now();
    let check = check_table1();
    let secs = started.elapsed().as_secs_f64();
    let flagged = check.discrepancies.len() == 1 && check.discrepancies[0].starts_with("adaptive_growth_depth");
    let by_importance = check.adaptive_depth_dominators.iter().any(|d| d == "no_importance");
    verdict(
        check.matched == 13 && check.total == 14 && flagged && by_importance && secs < 1.0,
        format!(
            "{}/{} statuses match; adaptive_growth_depth dominated by [{}]; {:.3}s",
            check.matched,
            check.total,
            check.adaptive_depth_dominators.join(", "),
            secs
        ),
    )
}

fn c2_gradients() -> Verdict {
    let started = Instant::now();
    let mut checked = 0;
    let mut failures = Vec::new();
    for (kind, out_dim) in [(LossKind::Regression, 2), (LossKind::Classification, 1)] {
        for seed in 0..10 {
            for width in [4, 32, 128] {
                let net = random_net(seed, width, kind, out_dim);
                let (xs, ys) = random_batch(seed + 100, 4, kind, out_dim);
                for task in 0..3 {
                    for gating in [false, true] {
                        checked += 1;
                        if let Some(bad) = finite_difference_mismatch(&net, &xs, &ys, task, gating, 1e-5, 1e-4) {
                            failures.push(format!("{kind:?}/seed{seed}/w{width}: {bad:?}"));
                        }
                    }
                }
            }
        }
    }
    let secs = started.elapsed().as_secs_f64();
    verdict(
        failures.is_empty() && secs < 60.0,
        format!(
            "{checked} nets checked, {} mismatches, {secs:.1}s {}",
            failures.len(),
            failures.join("; ")
        ),
    )
}

fn c3_freeze() -> Verdict {
    let started = Instant::now();
    let tasks = match generate_track(&TrackSpec::new(Track::B1), 0) {
        Ok(t) => t,
        Err(e) => return verdict(false, e.to_string()),
    };
    let frozen: Arc<Mutex<BTreeMap<usize, [u8; 32]>>> = Arc::default();
    let violations = Arc::new(Mutex::new(0usize));
    let checks = Arc::new(Mutex::new(0usize));
    let mut learner = Learner::new(config("no_importance").unwrap(), RunSettings::default(), 0).unwrap();
    {
        let (frozen, violations, checks) = (frozen.clone(), violations.clone(), checks.clone());
        learner.set_epoch_observer(move |net, _, _| {
            let now: BTreeMap<usize, [u8; 32]> = frozen_row_hashes(net).into_iter().collect();
            for (i, h) in frozen.lock().unwrap().iter() {
                *checks.lock().unwrap() += 1;
                if now.get(i) != Some(h) {
                    *violations.lock().unwrap() += 1;
                }
            }
        });
    }
    for ds in tasks.iter().take(3) {
        if let Err(e) = learner.train_task(ds) {
            return verdict(false, e.to_string());
        }
        let mut map = frozen.lock().unwrap();
        for (i, h) in frozen_row_hashes(learner.net()) {
            if map.insert(i, h).is_some_and(|old| old != h) {
                *violations.lock().unwrap() += 1;
            }
        }
    }
    let rows = frozen.lock().unwrap().len();
    let violations = *violations.lock().unwrap();
    let checks = *checks.lock().unwrap();
    let secs = started.elapsed().as_secs_f64();
    verdict(
        violations == 0 && rows > 0 && checks > 0 && secs < 300.0,
        format!("{rows} frozen rows, {checks} row checks, {violations} changed, {secs:.1}s"),
    )
}

fn c4_fisher() -> Verdict {
    let mut worst = 0.0f64;
    let mut steps = 0;
    for (name, mode) in [
        ("ewc_topologie", EwcMode::Topo),
        ("ewc_topology_pertask", EwcMode::TopoPertask),
    ] {
        for track in [Track::B4, Track::BMixed] {
            let tasks = generate_track(&TrackSpec::new(track), 0).unwrap();
            let mut learner = Learner::new(config(name).unwrap(), RunSettings::default(), 0).unwrap();
            if learner.fisher().mode() != mode {
                return verdict(false, format!("{name} runs in {:?}", learner.fisher().mode()));
            }
            for ds in &tasks {
                if let Err(e) = learner.train_task(ds) {
                    return verdict(false, e.to_string());
                }
                worst = worst.max(learner.fisher().mass_outside_support(learner.net()));
                steps += 1;
            }
        }
    }
    verdict(
        worst == 0.0,
        format!("{steps} post-task checks, max mass outside support {worst:e}"),
    )
}

fn c5_fourier(results: &[RunResult]) -> Verdict {
    let tracks = [Track::B1, Track::BMixed];
    match (
        point(results, "full_mpcs", &tracks),
        point(results, "no_fourier", &tracks),
    ) {
        (Some(full), Some(ablated)) => {
            let gap = full.perf - ablated.perf;
            verdict(
                gap >= 0.15,
                format!(
                    "Perf full {:.4} vs no_fourier {:.4}, gap {gap:.4} (need >= 0.15)",
                    full.perf, ablated.perf
                ),
            )
        }
        _ => verdict(false, "missing cells"),
    }
}

fn c6_growth(results: &[RunResult]) -> Verdict {
    match (
        point(results, "full_mpcs", &Track::ALL),
        point(results, "no_adaptive_growth", &Track::ALL),
    ) {
        (Some(full), Some(fixed)) => {
            let ratio = fixed.gcr / full.gcr;
            verdict(
                fixed.gcr >= 3.0 * full.gcr,
                format!(
                    "GCR full {:.2} vs no_adaptive_growth {:.2}, ratio {ratio:.2} (need >= 3)",
                    full.gcr, fixed.gcr
                ),
            )
        }
        _ => verdict(false, "missing cells"),
    }
}

fn c7_efficiency(results: &[RunResult]) -> Verdict {
    match (
        point(results, "full_mpcs", &Track::ALL),
        point(results, "mpcs_efficient", &Track::ALL),
    ) {
        (Some(full), Some(eff)) => {
            let ratio = eff.time_min / full.time_min;
            let fast = ratio <= 0.5;
            let good = eff.perf >= full.perf - 0.01;
            verdict(
                fast && good,
                format!(
                    "time ratio {ratio:.2} (need <= 0.5); Perf full {:.4} vs efficient {:.4} (need >= full - 0.01)",
                    full.perf, eff.perf
                ),
            )
        }
        _ => verdict(false, "missing cells"),
    }
}

fn c8_gate(results: &[RunResult]) -> Verdict {
    let names = ["full_mpcs", "no_adaptive_growth", "mpcs_efficient", "baseline_minimal"];
    let points: Vec<SystemPoint> = names.iter().filter_map(|n| point(results, n, &Track::ALL)).collect();
    if points.len() != names.len() {
        return verdict(false, "missing cells");
    }
    let report = analyze(&points);
    let rate = |n: &str| {
        points
            .iter()
            .find(|p| p.name == n)
            .and_then(|p| p.gate_pass_rate)
            .unwrap_or(f64::NAN)
    };
    let base = rate("baseline_minimal");
    let full = rate("full_mpcs");
    let excluded = report.status.get("baseline_minimal") == Some(&Status::Excluded);
    verdict(
        base < GATE_THRESHOLD && excluded && full >= GATE_THRESHOLD,
        format!("baseline_minimal gate {base:.3} (excluded: {excluded}); full_mpcs gate {full:.3}"),
    )
}

fn c9_nes() -> Verdict {
    let mut rng = Stream::new(0, "nes-ensembles");
    let mut problems = 0;
    for e in 0..200 {
        let n = 1 + rng.below(12);
        let mut pts: Vec<SystemPoint> = (0..n)
            .map(|i| SystemPoint {
                name: format!("s{i}"),
                perf: rng.below(20) as f64 / 20.0,
                sigma: 0.0,
                rd: rng.below(20) as f64 / 40.0,
                gcr: rng.below(20) as f64 / 2.0,
                gate_pass_rate: Some(1.0),
                time_min: 1.0,
            })
            .collect();
        if e % 2 == 0 {
            pts.push(SystemPoint {
                name: "best".into(),
                perf: pts.iter().map(|p| p.perf).fold(f64::NEG_INFINITY, f64::max),
                rd: pts.iter().map(|p| p.rd).fold(f64::INFINITY, f64::min),
                gcr: pts.iter().map(|p| p.gcr).fold(f64::INFINITY, f64::min),
                ..pts[0].clone()
            });
        }
        let scores = nes(&pts);
        for (a, sa) in pts.iter().zip(&scores) {
            if !(0.0..=100.0).contains(sa) || (a.name == "best" && (sa - 100.0).abs() > 1e-12) {
                problems += 1;
            }
            for (b, sb) in pts.iter().zip(&scores) {
                if dominates(a, b) && sa < sb {
                    problems += 1;
                }
            }
        }
    }
    verdict(problems == 0, format!("200 ensembles, {problems} violations"))
}

fn c10_determinism(results: &[RunResult], dir: &Path) -> Verdict {
    let Some(stored) = results
        .iter()
        .find(|r| r.metrics.config == "full_mpcs" && r.metrics.seed == 1 && r.metrics.track == Track::BMixed)
    else {
        return verdict(false, format!("missing cell in {}", dir.display()));
    };
    let fresh = run_cell(
        &config("full_mpcs").unwrap(),
        &RunSettings::default(),
        Track::BMixed,
        1,
        &BTreeSet::new(),
    );
    match fresh {
        Ok(fresh) => {
            let same = fresh.without_timing().to_json().unwrap() == stored.without_timing().to_json().unwrap();
            verdict(same, format!("full_mpcs/B_MIXED/seed1 rerun identical: {same}"))
        }
        Err(e) => verdict(false, e.to_string()),
    }
}

fn c11_excision() -> Verdict {
    let settings = RunSettings::default();
    let full = config("full_mpcs").unwrap();
    let mut differing = Vec::new();
    for m in Mechanism::ALL {
        for seed in [0, 1] {
            let mut off = full.clone();
            off.flags = off.flags.without(m);
            let a = run_cell(&off, &settings, Track::B4, seed, &BTreeSet::new());
            let b = run_cell(&full, &settings, Track::B4, seed, &BTreeSet::from([m]));
            let (Ok(a), Ok(b)) = (a, b) else {
                differing.push(format!("{}/s{seed}: error", m.name()));
                continue;
            };
            let mut a = a.without_timing();
            let mut b = b.without_timing();
            a.metrics.config.clear();
            b.metrics.config.clear();
            a.config_hash.clear();
            b.config_hash.clear();
            if a.to_json().unwrap() != b.to_json().unwrap() {
                differing.push(format!("{}/s{seed}", m.name()));
            }
        }
    }
    verdict(
        differing.is_empty(),
        format!(
            "{} mechanisms x 2 seeds on B4, differing: [{}]",
            Mechanism::ALL.len(),
            differing.join(", ")
        ),
    )
}

fn shared_matrix(dir: &Path) -> mpcs::Result<Vec<RunResult>> {
    let settings = RunSettings::default();
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let main: Vec<_> = ["full_mpcs", "no_adaptive_growth", "mpcs_efficient", "baseline_minimal"]
        .iter()
        .map(|n| config(n))
        .collect::<mpcs::Result<_>>()?;
    let summary = run_matrix(&main, &SEEDS, &Track::ALL, &settings, dir, workers)?;
    let fourier = run_matrix(
        &[config("no_fourier")?],
        &SEEDS,
        &[Track::B1, Track::BMixed],
        &settings,
        dir,
        workers,
    )?;
    for (cell, e) in summary.failed.iter().chain(&fourier.failed) {
        eprintln!("cell {} failed: {e}", cell.file_name());
    }
    load_results(dir)
}

fn main() -> ExitCode {
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if !filter.is_empty() && !filter.iter().any(|f| "acceptance".contains(f.as_str())) {
        return ExitCode::SUCCESS;
    }
    let dir = tempfile::tempdir().expect("temp dir");
    let mut lines = Vec::new();
    let mut report = |id: u32, name: &str, v: Verdict| {
        let line = format!("C{id:<2} {} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        println!("{line}");
        lines.push(v.pass);
    };

    report(1, "pareto engine vs published table", c1_table());
    report(2, "gradient finite differences", c2_gradients());
    report(3, "frozen rows unchanged", c3_freeze());
    report(4, "fisher topology support", c4_fisher());

    let started = Instant::now();
    let results = match shared_matrix(dir.path()) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("matrix failed: {e}");
            Vec::new()
        }
    };
    println!(
        "desk matrix: {} cells in {:.0}s",
        results.len(),
        started.elapsed().as_secs_f64()
    );
    report(5, "fourier ablation ordering", c5_fourier(&results));
    report(6, "growth pathology ordering", c6_growth(&results));
    report(7, "efficiency claim direction", c7_efficiency(&results));
    report(8, "gate behaviour", c8_gate(&results));
    report(9, "NES properties", c9_nes());
    report(10, "determinism", c10_determinism(&results, dir.path()));
    report(11, "flag-off equals excision", c11_excision());

    let passed = lines.iter().filter(|p| **p).count();
    println!("acceptance: {passed}/{} criteria passed", lines.len());
    if passed == lines.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
