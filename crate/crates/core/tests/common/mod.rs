#![allow(dead_code)]

use sha2::{Digest, Sha256};

use mpcs::net::{GrowableNet, LossKind};
use mpcs::rng::Stream;

pub const INPUT: usize = 8;

/// Three tasks of `kind`: hidden units split between the tasks and the
/// unowned pool, task 2 reading task 0, and every parameter randomised.
pub fn random_net(seed: u64, width: usize, kind: LossKind, out_dim: usize) -> GrowableNet {
    let mut rng = Stream::new(seed, "test-net");
    let mut net = GrowableNet::new(INPUT);
    for _ in 0..3 {
        net.add_task(kind, out_dim);
    }
    let quarter = (width / 4).max(1);
    let owners = [Some(0), Some(1), None, Some(2)];
    let mut grown = 0;
    for (k, owner) in owners.iter().enumerate() {
        let count = if k == 3 {
            width - grown
        } else {
            quarter.min(width - grown)
        };
        if count > 0 {
            net.grow(count, *owner, 0.5, &mut rng).unwrap();
            grown += count;
        }
    }
    net.add_read(2, 0).unwrap();
    for i in 0..net.params.len() {
        net.params.set_flat(i, 0.5 * rng.normal());
    }
    net
}

pub fn random_batch(seed: u64, n: usize, kind: LossKind, out_dim: usize) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let mut rng = Stream::new(seed, "test-batch");
    let xs = (0..n).map(|_| (0..INPUT).map(|_| rng.normal()).collect()).collect();
    let ys = (0..n)
        .map(|_| {
            (0..out_dim)
                .map(|_| match kind {
                    LossKind::Regression => rng.uniform_range(-1.0, 1.0),
                    LossKind::Classification => f64::from(u8::from(rng.bernoulli(0.5))),
                })
                .collect()
        })
        .collect();
    (xs, ys)
}

/// Largest violation of `|a − f| ≤ rel · max(|a|, |f|) + 1e-9` between the
/// analytic batch gradient and central differences with step `h`, as
/// `(flat index, analytic, numeric)`.
pub fn finite_difference_mismatch(
    net: &GrowableNet,
    xs: &[Vec<f64>],
    ys: &[Vec<f64>],
    task: usize,
    gating: bool,
    h: f64,
    rel: f64,
) -> Option<(usize, f64, f64)> {
    let xr: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
    let yr: Vec<&[f64]> = ys.iter().map(Vec::as_slice).collect();
    let mut grads = net.params.zeros_like();
    net.batch_gradient(&xr, &yr, task, gating, &mut grads).unwrap();
    let analytic = grads.flatten();
    let mut probe = net.clone();
    for (i, &a) in analytic.iter().enumerate() {
        let base = probe.params.get_flat(i);
        probe.params.set_flat(i, base + h);
        let up = probe.batch_loss(&xr, &yr, task, gating).unwrap();
        probe.params.set_flat(i, base - h);
        let down = probe.batch_loss(&xr, &yr, task, gating).unwrap();
        probe.params.set_flat(i, base);
        let f = (up - down) / (2.0 * h);
        if (a - f).abs() > rel * a.abs().max(f.abs()) + 1e-9 {
            return Some((i, a, f));
        }
    }
    None
}

pub fn row_hash(row: &[f64]) -> [u8; 32] {
    let mut h = Sha256::new();
    for v in row {
        h.update(v.to_bits().to_le_bytes());
    }
    h.finalize().into()
}

/// Hash of every frozen incoming row, keyed by neuron index.
pub fn frozen_row_hashes(net: &GrowableNet) -> Vec<(usize, [u8; 32])> {
    (0..net.hidden())
        .filter(|&i| net.is_frozen(i))
        .map(|i| {
            let mut row = net.params.row(i).to_vec();
            row.push(net.params.bias[i]);
            (i, row_hash(&row))
        })
        .collect()
}

pub struct Table1Check {
    pub matched: usize,
    pub total: usize,
    pub adaptive_depth_dominators: Vec<String>,
    pub discrepancies: Vec<String>,
    pub baseline_excluded: bool,
}

/// Runs the frontier over the bundled published table and compares every
/// gate-passing row's computed status with its published one.
pub fn check_table1() -> Table1Check {
    use mpcs::pareto::{analyze, compare_published, table1_fixture, Status};
    use std::collections::BTreeMap;

    let rows = table1_fixture();
    let points: Vec<_> = rows.iter().map(|r| r.point()).collect();
    let mut report = analyze(&points);
    let published: BTreeMap<String, Status> = rows
        .iter()
        .filter(|r| report.included.contains(&r.config))
        .map(|r| (r.config.clone(), r.parsed_status().unwrap().unwrap()))
        .collect();
    compare_published(&mut report, &published);
    let mismatched = report.discrepancies.len();
    let adaptive_depth_dominators = match report.status.get("adaptive_growth_depth") {
        Some(Status::Dominated(by)) => by.clone(),
        _ => Vec::new(),
    };
    Table1Check {
        matched: published.len() - mismatched,
        total: published.len(),
        adaptive_depth_dominators,
        discrepancies: report.discrepancies,
        baseline_excluded: report.status.get("baseline_minimal") == Some(&Status::Excluded),
    }
}
