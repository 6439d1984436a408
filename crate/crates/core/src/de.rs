//! Differential evolution with current-to-pbest/1/bin mutation, an external
//! archive and randomized greediness.
//!
//! For each target `xᵢ` the donor is
//! `v = xᵢ + F (x_pbest − xᵢ) + F (x_r1 − x_r2)` where `x_pbest` is drawn from the
//! best `max(2, ⌈q p₃⌉)` members with `q ~ U[2/p₃, 0.2]`, `r1` from the
//! population and `r2` from population ∪ archive. Binomial crossover with one
//! forced donor coordinate builds the trial, and one-to-one selection keeps the
//! trial when it is no worse than the target.

use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bench::Objective;
use crate::error::{Error, Result};
use crate::sampling::SeededRng;

/// DE control parameters `(p₁, p₂, p₃)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlParams {
    /// Crossover constant p₁ in [0, 1].
    pub crossover: f64,
    /// Weighting factor p₂.
    pub weight: f64,
    /// Population size p₃.
    pub population: usize,
}

impl ControlParams {
    /// Smallest population for which target, pbest, r1 and r2 can be distinct.
    pub const MIN_POPULATION: usize = 5;

    pub fn new(crossover: f64, weight: f64, population: usize) -> Self {
        ControlParams {
            crossover,
            weight,
            population,
        }
    }

    /// The commonly recommended `(0.9, 0.5, 10 D)`.
    pub fn literature(dim: usize) -> Self {
        ControlParams::new(0.9, 0.5, (10 * dim).max(Self::MIN_POPULATION))
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.crossover) {
            return Err(Error::contract(format!("crossover {} outside [0, 1]", self.crossover)));
        }
        if !(self.weight >= 0.0 && self.weight.is_finite()) {
            return Err(Error::contract(format!("weight {} must be finite and >= 0", self.weight)));
        }
        if self.population < Self::MIN_POPULATION {
            return Err(Error::contract(format!(
                "population {} below minimum {}",
                self.population,
                Self::MIN_POPULATION
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Maximum objective evaluations the optimizer may spend.
    pub budget: u64,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    /// 1-based; generation 1 is the initial population.
    pub generation: usize,
    /// Objective evaluation counter after this generation. This includes any
    /// evaluations charged to the objective before the run (feature sampling).
    pub evaluations: u64,
    pub best: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub generations: Vec<GenerationRecord>,
    pub best_solution: Vec<f64>,
    /// Evaluations spent by the optimizer itself.
    pub optimizer_evaluations: u64,
}

impl RunTrace {
    pub fn final_best(&self) -> f64 {
        self.generations.last().map_or(f64::INFINITY, |g| g.best)
    }

    pub fn total_evaluations(&self) -> u64 {
        self.generations.last().map_or(0, |g| g.evaluations)
    }

    /// `gen,evals,best` rows, one per generation.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("gen,evals,best\n");
        for g in &self.generations {
            let _ = writeln!(out, "{},{},{}", g.generation, g.evaluations, g.best);
        }
        out
    }

    /// The first generation plus every generation that improved on the previous best.
    pub fn improvements(&self) -> Vec<GenerationRecord> {
        let mut out: Vec<GenerationRecord> = Vec::new();
        for g in &self.generations {
            if out.last().is_none_or(|last| g.best < last.best) {
                out.push(*g);
            }
        }
        out
    }
}

/// Replaced parents, bounded by the population size.
#[derive(Clone, Debug, Default)]
pub struct Archive {
    pub members: Vec<Vec<f64>>,
    pub capacity: usize,
}

impl Archive {
    pub fn new(capacity: usize) -> Self {
        Archive {
            members: Vec::with_capacity(capacity + 1),
            capacity,
        }
    }

    /// Inserts `x`, evicting a uniformly random member when over capacity.
    pub fn push<R: Rng>(&mut self, x: Vec<f64>, rng: &mut R) {
        if self.capacity == 0 {
            return;
        }
        self.members.push(x);
        if self.members.len() > self.capacity {
            let victim = rng.random_range(0..self.members.len());
            self.members.swap_remove(victim);
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Population {
    pub members: Vec<Vec<f64>>,
    pub fitness: Vec<f64>,
}

impl Population {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn best_index(&self) -> usize {
        self.fitness
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .expect("population is non-empty")
    }

    pub fn best(&self) -> f64 {
        self.fitness[self.best_index()]
    }

    /// Member indices sorted by fitness, ties by index.
    pub fn ranking(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| self.fitness[a].total_cmp(&self.fitness[b]));
        idx
    }
}

/// `size` points uniform in the objective's domain, all evaluated.
pub fn init_population<O: Objective + ?Sized>(
    objective: &mut O,
    size: usize,
    rng: &mut SeededRng,
) -> Result<Population> {
    if size < ControlParams::MIN_POPULATION {
        return Err(Error::contract(format!("population {size} below minimum")));
    }
    let domain = objective.domain().clone();
    let members: Vec<Vec<f64>> = (0..size)
        .map(|_| {
            domain
                .lower
                .iter()
                .zip(&domain.upper)
                .map(|(&l, &u)| rng.random_range(l..u))
                .collect()
        })
        .collect();
    let fitness = members
        .iter()
        .map(|x| objective.evaluate(x))
        .collect::<Result<Vec<f64>>>()?;
    Ok(Population { members, fitness })
}

/// A trial that strictly improved on its target.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Success {
    pub individual: usize,
    pub crossover: f64,
    pub weight: f64,
    /// `f(target) − f(trial)`, strictly positive.
    pub improvement: f64,
}

/// Source of per-individual `(crossover, weight)` values.
pub trait ParameterSchedule {
    fn sample(&mut self, individual: usize) -> (f64, f64);

    /// Called once per generation with that generation's successes.
    fn observe(&mut self, _successes: &[Success]) {}
}

/// The same `(p₁, p₂)` for every individual.
#[derive(Clone, Copy, Debug)]
pub struct FixedSchedule {
    pub crossover: f64,
    pub weight: f64,
}

impl ParameterSchedule for FixedSchedule {
    fn sample(&mut self, _individual: usize) -> (f64, f64) {
        (self.crossover, self.weight)
    }
}

/// Random choices and outcome for one target in one generation.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetLog {
    pub target: usize,
    /// Size of the top set pbest was drawn from.
    pub pbest_pool: usize,
    pub pbest: usize,
    pub r1: usize,
    /// Index into population ∪ archive; values `>= population` address the archive.
    pub r2: usize,
    pub forced: usize,
    /// Coordinates taken from the donor.
    pub from_donor: Vec<bool>,
    pub crossover: f64,
    pub weight: f64,
    pub trial: Vec<f64>,
    pub trial_value: f64,
    pub replaced: bool,
}

/// Runs one synchronous generation: every trial is built from the current
/// population, then all selections are applied.
pub fn evolve_generation<O, S>(
    objective: &mut O,
    population: &mut Population,
    archive: &mut Archive,
    schedule: &mut S,
    rng: &mut SeededRng,
    mut log: Option<&mut Vec<TargetLog>>,
) -> Result<Vec<Success>>
where
    O: Objective + ?Sized,
    S: ParameterSchedule + ?Sized,
{
    let np = population.len();
    let dim = objective.dim();
    let domain = objective.domain().clone();
    let ranking = population.ranking();
    let q_lo = (2.0 / np as f64).min(0.2);
    let q_hi = (2.0 / np as f64).max(0.2);

    let mut trials = Vec::with_capacity(np);
    for i in 0..np {
        let (cr, f) = schedule.sample(i);
        let q = if q_lo < q_hi { rng.random_range(q_lo..=q_hi) } else { q_lo };
        let pool = ((q * np as f64).ceil() as usize).clamp(2, np);
        let pbest = ranking[rng.random_range(0..pool)];

        let mut r1 = rng.random_range(0..np - 1);
        if r1 >= i {
            r1 += 1;
        }
        let union = np + archive.len();
        let r2 = loop {
            let r = rng.random_range(0..union);
            if r != i && r != r1 {
                break r;
            }
        };

        let target = &population.members[i];
        let xp = &population.members[pbest];
        let x1 = &population.members[r1];
        let x2 = if r2 < np {
            &population.members[r2]
        } else {
            &archive.members[r2 - np]
        };

        let forced = rng.random_range(0..dim);
        let mut trial = target.clone();
        let mut from_donor = vec![false; dim];
        for j in 0..dim {
            let take = j == forced || rng.random::<f64>() < cr;
            if !take {
                continue;
            }
            from_donor[j] = true;
            let v = target[j] + f * (xp[j] - target[j]) + f * (x1[j] - x2[j]);
            trial[j] = repair(v, target[j], domain.lower[j], domain.upper[j]);
        }
        trials.push((trial, cr, f, TargetMeta { pool, pbest, r1, r2, forced, from_donor }));
    }

    let mut successes = Vec::new();
    for (i, (trial, cr, f, meta)) in trials.into_iter().enumerate() {
        let value = objective.evaluate(&trial)?;
        let parent_value = population.fitness[i];
        let replaced = value <= parent_value;
        if let Some(log) = log.as_deref_mut() {
            log.push(TargetLog {
                target: i,
                pbest_pool: meta.pool,
                pbest: meta.pbest,
                r1: meta.r1,
                r2: meta.r2,
                forced: meta.forced,
                from_donor: meta.from_donor,
                crossover: cr,
                weight: f,
                trial: trial.clone(),
                trial_value: value,
                replaced,
            });
        }
        if replaced {
            if value < parent_value {
                successes.push(Success {
                    individual: i,
                    crossover: cr,
                    weight: f,
                    improvement: parent_value - value,
                });
            }
            let parent = std::mem::replace(&mut population.members[i], trial);
            population.fitness[i] = value;
            archive.push(parent, rng);
        }
    }
    schedule.observe(&successes);
    Ok(successes)
}

struct TargetMeta {
    pool: usize,
    pbest: usize,
    r1: usize,
    r2: usize,
    forced: usize,
    from_donor: Vec<bool>,
}

/// Out-of-bounds coordinates move halfway between the violated bound and the parent.
fn repair(v: f64, parent: f64, lower: f64, upper: f64) -> f64 {
    if v < lower {
        0.5 * (lower + parent)
    } else if v > upper {
        0.5 * (upper + parent)
    } else {
        v
    }
}

/// Runs the DE loop with an arbitrary parameter schedule.
///
/// Stops before a generation that would exceed `cfg.budget` optimizer
/// evaluations; the unused remainder is left unspent.
pub fn run_with_schedule<O, S>(
    objective: &mut O,
    population_size: usize,
    cfg: &RunConfig,
    schedule: &mut S,
) -> Result<RunTrace>
where
    O: Objective + ?Sized,
    S: ParameterSchedule + ?Sized,
{
    let np = population_size as u64;
    if cfg.budget < np {
        return Err(Error::contract(format!(
            "budget {} smaller than population {}",
            cfg.budget, population_size
        )));
    }
    let mut rng = SeededRng::substream(cfg.seed, "de");
    let start = objective.evaluations();
    let mut population = init_population(objective, population_size, &mut rng)?;
    let mut archive = Archive::new(population_size);
    let mut generations = vec![GenerationRecord {
        generation: 1,
        evaluations: objective.evaluations(),
        best: population.best(),
    }];
    while objective.evaluations() - start + np <= cfg.budget {
        evolve_generation(objective, &mut population, &mut archive, schedule, &mut rng, None)?;
        generations.push(GenerationRecord {
            generation: generations.len() + 1,
            evaluations: objective.evaluations(),
            best: population.best(),
        });
    }
    Ok(RunTrace {
        generations,
        best_solution: population.members[population.best_index()].clone(),
        optimizer_evaluations: objective.evaluations() - start,
    })
}

/// Fixed-parameter DE.
pub fn optimize<O: Objective + ?Sized>(objective: &mut O, params: &ControlParams, cfg: &RunConfig) -> Result<RunTrace> {
    params.validate()?;
    let mut schedule = FixedSchedule {
        crossover: params.crossover,
        weight: params.weight,
    };
    run_with_schedule(objective, params.population, cfg, &mut schedule)
}
