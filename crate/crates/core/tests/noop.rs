use std::collections::BTreeSet;

use mpcs::bench::{BenchParams, Track};
use mpcs::plasticity::{Hyper, Mechanism};
use mpcs::runner::{config, run_cell, RunResult, RunSettings};

fn settings() -> RunSettings {
    RunSettings {
        max_epochs: 20,
        patience: 10,
        bench: BenchParams {
            train: 64,
            test: 64,
            ..BenchParams::default()
        },
        ..RunSettings::default()
    }
}

fn run(hyper: impl Fn(&mut Hyper), off: Option<Mechanism>) -> RunResult {
    let mut cfg = config("full_mpcs").unwrap();
    hyper(&mut cfg.hyper);
    if let Some(m) = off {
        cfg.flags = cfg.flags.without(m);
    }
    run_cell(&cfg, &settings(), Track::BMixed, 1, &BTreeSet::new()).unwrap()
}

/// Everything the trained network determines, bit for bit.
fn fingerprint(r: &RunResult) -> Vec<u64> {
    let m = &r.metrics;
    let mut out: Vec<u64> = m.perf_per_task.iter().map(|v| v.to_bits()).collect();
    out.extend([m.rd.to_bits(), m.gcr.to_bits(), r.hidden as u64]);
    for l in &r.task_log {
        out.extend([l.epochs as u64, l.final_loss.to_bits(), l.hidden_after as u64]);
    }
    out
}

fn assert_neutral(m: Mechanism, neutral: impl Fn(&mut Hyper)) {
    let on = run(neutral, None);
    let off = run(|_| {}, Some(m));
    assert_eq!(fingerprint(&on), fingerprint(&off), "{m:?}");
}

#[test]
fn zero_replay_ratio_matches_replay_off() {
    assert_neutral(Mechanism::Replay, |h| h.replay_ratio = 0.0);
}

#[test]
fn zero_hebbian_rate_matches_hebbian_off() {
    assert_neutral(Mechanism::Hebbian, |h| h.hebb_rate = 0.0);
}

#[test]
fn zero_ewc_strength_matches_ewc_off() {
    assert_neutral(Mechanism::Ewc, |h| h.lambda_ewc = 0.0);
}

#[test]
fn unreachable_similarity_threshold_matches_routing_off() {
    assert_neutral(Mechanism::Similarity, |h| h.sim_threshold = 1.5);
}

#[test]
fn vanishing_prune_threshold_matches_pruning_off() {
    assert_neutral(Mechanism::Pruning, |h| h.prune_threshold = 1e-300);
}
