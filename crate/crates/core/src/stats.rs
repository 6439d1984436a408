//! Wilcoxon signed-ranks test with zero-splitting.
//!
//! All `|dᵢ|`, zeros included, are ranked with average ranks for ties. Ranks
//! of zero differences are split evenly between `R⁺` and `R⁻`, and the signed
//! statistic `W = R⁺ − R⁻` is reported (positive when the first method has the
//! larger values). Two-sided p-values are exact for `n ≤ 20` without zeros and
//! use the tie-corrected normal approximation of `min(R⁺, R⁻)` with a 0.5
//! continuity correction otherwise.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

pub const EXACT_MAX_N: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PValueMethod {
    Exact,
    Normal,
    /// Every difference was zero.
    Degenerate,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    pub n: usize,
    pub zeros: usize,
    pub r_plus: f64,
    pub r_minus: f64,
    pub w: f64,
    pub p_value: f64,
    pub method: PValueMethod,
}

/// 1-based ranks with ties replaced by their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j + 2) as f64 / 2.0;
        for &o in &order[i..=j] {
            ranks[o] = avg;
        }
        i = j + 1;
    }
    ranks
}

pub fn wilcoxon(diffs: &[f64]) -> Result<WilcoxonResult> {
    if diffs.is_empty() {
        return Err(Error::contract("wilcoxon needs at least one difference"));
    }
    if diffs.iter().any(|d| !d.is_finite()) {
        return Err(Error::contract("wilcoxon differences must be finite"));
    }
    let n = diffs.len();
    let zeros = diffs.iter().filter(|&&d| d == 0.0).count();
    if zeros == n {
        let half = (n * (n + 1)) as f64 / 4.0;
        return Ok(WilcoxonResult {
            n,
            zeros,
            r_plus: half,
            r_minus: half,
            w: 0.0,
            p_value: 1.0,
            method: PValueMethod::Degenerate,
        });
    }

    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = average_ranks(&abs);
    let (mut r_plus, mut r_minus) = (0.0, 0.0);
    for (d, r) in diffs.iter().zip(&ranks) {
        if *d > 0.0 {
            r_plus += r;
        } else if *d < 0.0 {
            r_minus += r;
        } else {
            r_plus += r / 2.0;
            r_minus += r / 2.0;
        }
    }
    let w = r_plus - r_minus;

    let (p_value, method) = if n <= EXACT_MAX_N && zeros == 0 {
        (exact_p(&ranks, w), PValueMethod::Exact)
    } else {
        (normal_p(&abs, r_plus.min(r_minus)), PValueMethod::Normal)
    };
    Ok(WilcoxonResult {
        n,
        zeros,
        r_plus,
        r_minus,
        w,
        p_value,
        method,
    })
}

/// `P(|W'| ≥ |W|)` over all `2ⁿ` equally likely sign assignments, counted by a
/// dynamic program over doubled (integral) rank sums.
fn exact_p(ranks: &[f64], w: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let total: usize = doubled.iter().sum();
    // counts[s] = sign patterns whose doubled R⁺ equals s
    let mut counts = vec![0u64; total + 1];
    counts[0] = 1;
    let mut reach = 0;
    for &r in &doubled {
        for s in (0..=reach).rev() {
            if counts[s] > 0 {
                counts[s + r] += counts[s];
            }
        }
        reach += r;
    }
    // W' = R⁺' − R⁻' = 2R⁺' − S, so in doubled units 2W' = 2·(2R⁺') − 2S.
    let target = (2.0 * w).abs().round() as i64;
    let extreme: u64 = counts
        .iter()
        .enumerate()
        .filter(|(s, _)| (2 * *s as i64 - total as i64).abs() >= target)
        .map(|(_, c)| c)
        .sum();
    (extreme as f64 / 2f64.powi(ranks.len() as i32)).min(1.0)
}

fn normal_p(abs: &[f64], t: f64) -> f64 {
    let n = abs.len() as f64;
    let mean = n * (n + 1.0) / 4.0;
    let mut sorted = abs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let j = sorted[i..].iter().take_while(|&&v| v == sorted[i]).count();
        let t = j as f64;
        tie_term += t * t * t - t;
        i += j;
    }
    let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    if var <= 0.0 {
        return 1.0;
    }
    let z = ((t - mean).abs() - 0.5).max(0.0) / var.sqrt();
    erfc(z / std::f64::consts::SQRT_2).min(1.0)
}
