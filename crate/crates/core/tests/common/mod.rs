//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use tuneseer::de::{GenerationRecord, RunTrace};
use tuneseer::predictor::{RecordMeta, TrainingRecord};
use tuneseer::{ControlParams, FeatureVector};

pub fn trace(rows: &[(u64, f64)]) -> RunTrace {
    RunTrace {
        generations: rows
            .iter()
            .enumerate()
            .map(|(i, &(evaluations, best))| GenerationRecord {
                generation: i + 1,
                evaluations,
                best,
            })
            .collect(),
        best_solution: vec![0.0; 2],
        optimizer_evaluations: rows.last().map_or(0, |r| r.0),
    }
}

/// Minimum within-cluster sum of squares over every assignment of `points`
/// into at most `k` non-empty groups.
pub fn exhaustive_inertia(points: &[Vec<f64>], k: usize) -> f64 {
    let n = points.len();
    let mut labels = vec![0usize; n];
    let mut best = f64::INFINITY;
    loop {
        let used = labels.iter().copied().max().map_or(0, |m| m + 1);
        if used <= k {
            best = best.min(partition_cost(points, &labels, used));
        }
        // Odometer over restricted-growth strings.
        let mut i = n;
        loop {
            if i == 1 {
                return best;
            }
            i -= 1;
            let cap = labels[..i].iter().copied().max().unwrap_or(0) + 1;
            if labels[i] < cap.min(k - 1) {
                labels[i] += 1;
                for l in &mut labels[i + 1..] {
                    *l = 0;
                }
                break;
            }
        }
    }
}

fn partition_cost(points: &[Vec<f64>], labels: &[usize], groups: usize) -> f64 {
    let dim = points[0].len();
    let mut total = 0.0;
    for g in 0..groups {
        let members: Vec<&Vec<f64>> = points.iter().zip(labels).filter(|(_, &l)| l == g).map(|(p, _)| p).collect();
        let mut mean = vec![0.0; dim];
        for p in &members {
            for (m, v) in mean.iter_mut().zip(p.iter()) {
                *m += v / members.len() as f64;
            }
        }
        for p in &members {
            total += p.iter().zip(&mean).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        }
    }
    total
}

/// Exact two-sided signed-rank p by enumerating all 2ⁿ sign patterns of the
/// ranks `1..=n`. Returns `(W, p)` for the given diffs (distinct |d|, no zeros).
pub fn enumerate_signed_rank(diffs: &[f64]) -> (f64, f64) {
    let n = diffs.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| diffs[a].abs().total_cmp(&diffs[b].abs()));
    let mut rank = vec![0u64; n];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r as u64 + 1;
    }
    let r_plus: u64 = (0..n).filter(|&i| diffs[i] > 0.0).map(|i| rank[i]).sum();
    let total = (n * (n + 1) / 2) as u64;
    let observed = r_plus.min(total - r_plus);
    let mut extreme = 0u64;
    for mask in 0u64..(1 << n) {
        let s: u64 = (0..n).filter(|&b| mask >> b & 1 == 1).map(|b| b as u64 + 1).sum();
        if s.min(total - s) <= observed {
            extreme += 1;
        }
    }
    let w = 2.0 * r_plus as f64 - total as f64;
    (w, extreme as f64 / (1u64 << n) as f64)
}

pub fn record(p: (f64, f64, usize), beta: (f64, f64, f64), alpha: f64) -> TrainingRecord {
    TrainingRecord {
        params: ControlParams::new(p.0, p.1, p.2),
        features: FeatureVector::new(beta.0, beta.1, beta.2),
        alpha,
        meta: RecordMeta {
            function_id: "synthetic".into(),
            dim: beta.0 as usize,
            instance_seed: 0,
            run_seed: 0,
            sigma: 100,
            timestamp: 0,
        },
    }
}

/// Mean parameters of the best `max(1, ⌈m/10⌉)` records by α, computed directly.
pub fn brute_top_mean(records: &[&TrainingRecord]) -> (f64, f64, usize) {
    let mut sorted: Vec<&&TrainingRecord> = records.iter().collect();
    sorted.sort_by(|a, b| b.alpha.partial_cmp(&a.alpha).unwrap());
    let m = records.len();
    let top = std::cmp::max(1, (m + 9) / 10);
    let take = &sorted[..top];
    let cr = take.iter().map(|r| r.params.crossover).sum::<f64>() / top as f64;
    let f = take.iter().map(|r| r.params.weight).sum::<f64>() / top as f64;
    let p3 = take.iter().map(|r| r.params.population as f64).sum::<f64>() / top as f64;
    (cr, f, (p3.round() as usize).max(5))
}
