//! Efficiency score `α = 100 (F₁ − F_G) / (F₁ N_g)`.
//!
//! `F₁` and `F_G` are the best values of the first and last generation and
//! `N_g` the evaluation count at `g*`, the first generation with
//! `F_G / F_g > 0.99`. That ratio test is used when `F₁` and `F_G` are both
//! positive; otherwise `g*` is the first generation whose reduction
//! `F₁ − F_g` reaches 99% of the total reduction `F₁ − F_G`.

use serde::{Deserialize, Serialize};

use crate::de::RunTrace;
use crate::error::{Error, Result};

pub const CONVERGENCE_FRACTION: f64 = 0.99;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaDiagnostic {
    /// `F₁ ≤ 0`; α is reported as 0.
    NonPositiveStart,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerformanceScore {
    pub alpha: f64,
    /// 1-based generation index `g*`.
    pub g_star: usize,
    /// Evaluations up to and including `g*`.
    pub n_g: u64,
    pub diagnostic: Option<AlphaDiagnostic>,
}

pub fn compute_alpha(trace: &RunTrace) -> Result<PerformanceScore> {
    let gens = &trace.generations;
    let (first, last) = match (gens.first(), gens.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(Error::contract("alpha needs at least one generation")),
    };
    let (f1, fg) = (first.best, last.best);

    if f1 <= 0.0 {
        return Ok(PerformanceScore {
            alpha: 0.0,
            g_star: first.generation,
            n_g: first.evaluations,
            diagnostic: Some(AlphaDiagnostic::NonPositiveStart),
        });
    }
    if f1 == fg {
        return Ok(PerformanceScore {
            alpha: 0.0,
            g_star: first.generation,
            n_g: first.evaluations,
            diagnostic: None,
        });
    }

    let literal = fg > 0.0;
    let reached = |fv: f64| {
        if literal {
            fg / fv > CONVERGENCE_FRACTION
        } else {
            f1 - fv >= CONVERGENCE_FRACTION * (f1 - fg)
        }
    };
    let star = gens.iter().find(|g| reached(g.best)).unwrap_or(last);
    let n_g = star.evaluations;
    Ok(PerformanceScore {
        alpha: 100.0 * (f1 - fg) / (f1 * n_g as f64),
        g_star: star.generation,
        n_g,
        diagnostic: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::de::GenerationRecord;

    pub(crate) fn trace(rows: &[(u64, f64)]) -> RunTrace {
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
            best_solution: vec![],
            optimizer_evaluations: rows.last().map_or(0, |r| r.0),
        }
    }

    #[test]
    fn hand_trace() {
        let s = compute_alpha(&trace(&[(20, 100.0), (40, 10.0), (60, 1.5), (80, 1.0)])).unwrap();
        assert_eq!(s.g_star, 4);
        assert_eq!(s.n_g, 80);
        assert!((s.alpha - 1.2375).abs() <= 1e-12);
    }

    #[test]
    fn doubling_evals_halves_alpha() {
        let a = compute_alpha(&trace(&[(20, 100.0), (40, 10.0), (60, 1.5), (80, 1.0)])).unwrap();
        let b = compute_alpha(&trace(&[(40, 100.0), (80, 10.0), (120, 1.5), (160, 1.0)])).unwrap();
        assert_eq!(b.alpha, a.alpha / 2.0);
    }

    #[test]
    fn flat_trace_scores_zero() {
        let s = compute_alpha(&trace(&[(10, 10.0), (20, 10.0), (30, 10.0)])).unwrap();
        assert_eq!(s.alpha, 0.0);
        assert!(s.diagnostic.is_none());
    }

    #[test]
    fn empty_trace_rejected() {
        assert!(matches!(compute_alpha(&trace(&[])), Err(Error::Contract(_))));
    }

    #[test]
    fn zero_final_value_uses_reduction_rule() {
        // Total reduction 50; 99% of it (49.5) is first reached at F = 0.4.
        let s = compute_alpha(&trace(&[(10, 50.0), (20, 5.0), (30, 0.4), (40, 0.0)])).unwrap();
        assert_eq!(s.g_star, 3);
        assert!((s.alpha - 100.0 / 30.0).abs() < 1e-12);
    }

    #[test]
    fn non_positive_start_flagged() {
        let s = compute_alpha(&trace(&[(10, -1.0), (20, -5.0)])).unwrap();
        assert_eq!(s.alpha, 0.0);
        assert_eq!(s.diagnostic, Some(AlphaDiagnostic::NonPositiveStart));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn decreasing_trace() -> impl Strategy<Value = Vec<(u64, f64)>> {
            prop::collection::vec((1u64..500, 0.0f64..1.0), 1..30).prop_map(|steps| {
                let mut evals = 0;
                let mut best = 1000.0;
                steps
                    .into_iter()
                    .map(|(de, shrink)| {
                        evals += de;
                        best *= shrink.max(0.01);
                        (evals, best)
                    })
                    .collect()
            })
        }

        proptest! {
            #[test]
            fn scaling_evals_scales_alpha(rows in decreasing_trace(), c in 1u64..20) {
                let a = compute_alpha(&trace(&rows)).unwrap();
                let scaled: Vec<_> = rows.iter().map(|&(e, b)| (e * c, b)).collect();
                let b = compute_alpha(&trace(&scaled)).unwrap();
                prop_assert!((b.alpha * c as f64 - a.alpha).abs() <= 1e-12 * a.alpha.max(1.0));
            }

            #[test]
            fn positive_iff_reduction(rows in decreasing_trace()) {
                let s = compute_alpha(&trace(&rows)).unwrap();
                let (f1, fg) = (rows[0].1, rows[rows.len() - 1].1);
                prop_assert_eq!(s.alpha > 0.0, f1 > fg && f1 > 0.0);
                prop_assert!(s.n_g <= rows[rows.len() - 1].0);
            }

            #[test]
            fn earlier_convergence_never_hurts(rows in decreasing_trace(), cut in 0usize..30) {
                // Replace the tail after `cut` by the final value: g* can only move earlier.
                let cut = cut.min(rows.len() - 1);
                let fg = rows[rows.len() - 1].1;
                let early: Vec<_> = rows.iter().enumerate()
                    .map(|(i, &(e, b))| (e, if i >= cut && i > 0 { fg } else { b }))
                    .collect();
                let a = compute_alpha(&trace(&rows)).unwrap();
                let b = compute_alpha(&trace(&early)).unwrap();
                prop_assert!(b.alpha >= a.alpha);
            }
        }
    }
}
