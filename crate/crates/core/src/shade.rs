//! Success-history based adaptive DE (SHADE) on top of the [`crate::de`] kernel.
//!
//! Each individual draws a memory slot `r`, then `CR ~ N(M_CR[r], 0.1)` clipped
//! to `[0, 1]` and `F ~ Cauchy(M_F[r], 0.1)`, redrawn while `F ≤ 0` and
//! truncated to 1. After a generation with successes, one slot is overwritten
//! with the improvement-weighted arithmetic mean of the successful CRs and the
//! weighted Lehmer mean `Σ w F² / Σ w F` of the successful Fs.

use rand::Rng;
use rand_distr::{Cauchy, Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::bench::Objective;
use crate::de::{run_with_schedule, ParameterSchedule, RunConfig, RunTrace, Success};
use crate::error::Result;
use crate::sampling::SeededRng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShadeSettings {
    pub population: usize,
    /// Memory size H.
    pub memory_size: usize,
}

impl Default for ShadeSettings {
    fn default() -> Self {
        ShadeSettings {
            population: 100,
            memory_size: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShadeMemory {
    pub m_cr: Vec<f64>,
    pub m_f: Vec<f64>,
    pub write_index: usize,
}

impl ShadeMemory {
    pub fn new(size: usize) -> Self {
        ShadeMemory {
            m_cr: vec![0.5; size],
            m_f: vec![0.5; size],
            write_index: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.m_cr.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m_cr.is_empty()
    }

    /// Writes one slot from the generation's successes. Returns whether the
    /// memory changed; a generation without successes leaves it untouched.
    pub fn update(&mut self, successes: &[Success]) -> bool {
        let total: f64 = successes.iter().map(|s| s.improvement).sum();
        if successes.is_empty() || !(total > 0.0) {
            return false;
        }
        let mut cr = 0.0;
        let mut f_num = 0.0;
        let mut f_den = 0.0;
        for s in successes {
            let w = s.improvement / total;
            cr += w * s.crossover;
            f_num += w * s.weight * s.weight;
            f_den += w * s.weight;
        }
        let k = self.write_index;
        self.m_cr[k] = cr.clamp(0.0, 1.0);
        if f_den > 0.0 {
            self.m_f[k] = (f_num / f_den).min(1.0);
        }
        self.write_index = (k + 1) % self.len();
        true
    }

    pub fn in_bounds(&self) -> bool {
        self.m_cr.iter().all(|v| (0.0..=1.0).contains(v))
            && self.m_f.iter().all(|v| *v > 0.0 && *v <= 1.0)
            && self.write_index < self.len()
    }
}

/// Samples `(CR, F)` around `(mean_cr, mean_f)` with the SHADE distributions.
pub fn sample_pair<R: Rng>(mean_cr: f64, mean_f: f64, rng: &mut R) -> (f64, f64) {
    let cr = Normal::new(mean_cr, 0.1)
        .expect("finite mean")
        .sample(rng)
        .clamp(0.0, 1.0);
    let cauchy = Cauchy::new(mean_f, 0.1).expect("finite location");
    let f = loop {
        let f = cauchy.sample(rng);
        if f > 0.0 {
            break f.min(1.0);
        }
    };
    (cr, f)
}

/// Memory-driven parameter schedule.
#[derive(Clone, Debug)]
pub struct ShadeSchedule {
    pub memory: ShadeMemory,
    rng: SeededRng,
    /// When true the memory is never written.
    pub frozen: bool,
}

impl ShadeSchedule {
    pub fn new(memory_size: usize, rng: SeededRng) -> Self {
        ShadeSchedule {
            memory: ShadeMemory::new(memory_size),
            rng,
            frozen: false,
        }
    }
}

impl ParameterSchedule for ShadeSchedule {
    fn sample(&mut self, _individual: usize) -> (f64, f64) {
        let r = self.rng.random_range(0..self.memory.len());
        let (m_cr, m_f) = (self.memory.m_cr[r], self.memory.m_f[r]);
        sample_pair(m_cr, m_f, &mut self.rng)
    }

    fn observe(&mut self, successes: &[Success]) {
        if !self.frozen {
            self.memory.update(successes);
        }
    }
}

/// Stream label for the parameter sampler.
pub const SCHEDULE_STREAM: &str = "shade/params";

/// Runs SHADE and returns the trace plus the final memory.
pub fn optimize_shade_with<O: Objective + ?Sized>(
    objective: &mut O,
    cfg: &RunConfig,
    settings: &ShadeSettings,
) -> Result<(RunTrace, ShadeMemory)> {
    let mut schedule = ShadeSchedule::new(
        settings.memory_size.max(1),
        SeededRng::substream(cfg.seed, SCHEDULE_STREAM),
    );
    let trace = run_with_schedule(objective, settings.population, cfg, &mut schedule)?;
    Ok((trace, schedule.memory))
}

pub fn optimize_shade<O: Objective + ?Sized>(objective: &mut O, cfg: &RunConfig) -> Result<RunTrace> {
    optimize_shade_with(objective, cfg, &ShadeSettings::default()).map(|(t, _)| t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn success(cr: f64, f: f64, delta: f64) -> Success {
        Success {
            individual: 0,
            crossover: cr,
            weight: f,
            improvement: delta,
        }
    }

    #[test]
    fn no_success_leaves_memory() {
        let mut m = ShadeMemory::new(4);
        let before = m.clone();
        assert!(!m.update(&[]));
        assert_eq!(m, before);
    }

    #[test]
    fn single_success_copies_pair() {
        let mut m = ShadeMemory::new(4);
        assert!(m.update(&[success(0.4, 0.6, 3.0)]));
        assert_eq!((m.m_cr[0], m.m_f[0]), (0.4, 0.6));
        assert_eq!(m.write_index, 1);
    }

    #[test]
    fn lehmer_mean_of_two() {
        let mut m = ShadeMemory::new(2);
        m.update(&[success(0.2, 0.5, 1.0), success(0.6, 1.0, 1.0)]);
        assert!((m.m_f[0] - 1.25 / 1.5).abs() < 1e-12);
        assert!((m.m_cr[0] - 0.4).abs() < 1e-12);
    }

    #[test]
    fn write_index_wraps() {
        let mut m = ShadeMemory::new(2);
        for _ in 0..3 {
            m.update(&[success(0.1, 0.2, 1.0)]);
        }
        assert_eq!(m.write_index, 1);
    }

    #[test]
    fn sampled_pairs_in_range() {
        let mut rng = SeededRng::new(3);
        for _ in 0..10_000 {
            let (cr, f) = sample_pair(0.95, 0.05, &mut rng);
            assert!((0.0..=1.0).contains(&cr));
            assert!(f > 0.0 && f <= 1.0);
        }
    }
}
