use rand::Rng;
use tuneseer::bench::{make_instance, FunctionId, ObjectiveSpec};
use tuneseer::de::{run_with_schedule, ParameterSchedule, RunConfig, Success};
use tuneseer::shade::{optimize_shade_with, sample_pair, ShadeMemory, ShadeSchedule, ShadeSettings, SCHEDULE_STREAM};
use tuneseer::SeededRng;

fn success(cr: f64, f: f64, dfit: f64) -> Success {
    Success { individual: 0, crossover: cr, weight: f, improvement: dfit }
}

#[test]
fn memory_update_examples() {
    let mut m = ShadeMemory::new(4);
    assert!(!m.update(&[]));
    assert_eq!((m.write_index, m.m_cr.clone(), m.m_f.clone()), (0, vec![0.5; 4], vec![0.5; 4]));

    assert!(m.update(&[success(0.4, 0.6, 3.0)]));
    assert_eq!((m.m_cr[0], m.m_f[0], m.write_index), (0.4, 0.6, 1));

    m.update(&[success(0.2, 0.5, 1.0), success(0.6, 1.0, 1.0)]);
    assert!((m.m_f[1] - 1.25 / 1.5).abs() < 1e-12);
    assert!((m.m_cr[1] - 0.4).abs() < 1e-12);

    m.update(&[success(0.1, 0.1, 1.0)]);
    m.update(&[success(0.1, 0.1, 1.0)]);
    assert_eq!(m.write_index, 0);
}

/// Wraps a schedule and records whether memory ever changed on an empty generation.
struct Audited {
    inner: ShadeSchedule,
    violations: usize,
    empty_generations: usize,
}

impl ParameterSchedule for Audited {
    fn sample(&mut self, i: usize) -> (f64, f64) {
        self.inner.sample(i)
    }
    fn observe(&mut self, successes: &[Success]) {
        let before = self.inner.memory.clone();
        self.inner.observe(successes);
        if successes.is_empty() {
            self.empty_generations += 1;
            if self.inner.memory != before {
                self.violations += 1;
            }
        }
        assert!(self.inner.memory.in_bounds());
    }
}

#[test]
fn empty_generations_leave_memory_untouched() {
    // Step's plateaus produce many generations without strict improvement.
    let mut inst = make_instance(ObjectiveSpec::new(FunctionId::Step, 5), 3).unwrap();
    let mut sched = Audited {
        inner: ShadeSchedule::new(100, SeededRng::substream(1, SCHEDULE_STREAM)),
        violations: 0,
        empty_generations: 0,
    };
    run_with_schedule(&mut inst, 100, &RunConfig { budget: 20_000, seed: 1 }, &mut sched).unwrap();
    assert!(sched.empty_generations > 0);
    assert_eq!(sched.violations, 0);
}

#[test]
fn memory_stays_in_bounds() {
    for (f, seed) in [(FunctionId::Rastrigin, 1), (FunctionId::Rosenbrock, 2), (FunctionId::Schwefel, 3)] {
        let mut inst = make_instance(ObjectiveSpec::new(f, 10), seed).unwrap();
        let (trace, memory) =
            optimize_shade_with(&mut inst, &RunConfig { budget: 10_000, seed }, &ShadeSettings::default()).unwrap();
        assert!(memory.in_bounds());
        assert!(trace.optimizer_evaluations <= 10_000);
    }
}

/// Samples with the SHADE distributions around fixed (0.5, 0.5), drawing the
/// slot index exactly as the memory schedule does.
struct FixedMeans {
    rng: SeededRng,
    slots: usize,
}

impl ParameterSchedule for FixedMeans {
    fn sample(&mut self, _i: usize) -> (f64, f64) {
        let _slot = self.rng.random_range(0..self.slots);
        sample_pair(0.5, 0.5, &mut self.rng)
    }
}

#[test]
fn frozen_memory_equals_fixed_means() {
    let spec = ObjectiveSpec::new(FunctionId::Ackley, 6);
    let cfg = RunConfig { budget: 6_000, seed: 21 };
    let mut frozen = ShadeSchedule::new(100, SeededRng::substream(cfg.seed, SCHEDULE_STREAM));
    frozen.frozen = true;
    let a = run_with_schedule(&mut make_instance(spec, 2).unwrap(), 100, &cfg, &mut frozen).unwrap();
    let mut fixed = FixedMeans { rng: SeededRng::substream(cfg.seed, SCHEDULE_STREAM), slots: 100 };
    let b = run_with_schedule(&mut make_instance(spec, 2).unwrap(), 100, &cfg, &mut fixed).unwrap();
    assert_eq!(a, b);
    assert_eq!(frozen.memory, ShadeMemory::new(100));
}

#[test]
fn sampled_pairs_in_range() {
    let mut rng = SeededRng::new(0);
    for _ in 0..10_000 {
        let (cr, f) = sample_pair(0.9, 0.05, &mut rng);
        assert!((0.0..=1.0).contains(&cr));
        assert!(f > 0.0 && f <= 1.0);
    }
}
