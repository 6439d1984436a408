//! Instanced continuous benchmark functions.
//!
//! Every function is defined on the common box `[-5, 5]^D`. An instance fixes a
//! shift `s` and an orthogonal rotation `R` from its seed and evaluates
//! `f(x) = base(R (x - s))`. Seed 0 is the untransformed base function.
//! Separable functions are only ever shifted; the rest are shifted and rotated.
//!
//! Base formulas (`y` is the transformed point, `D` the dimension):
//!
//! | id | formula |
//! |----|---------|
//! | `sphere` | `Σ yᵢ²` |
//! | `ellipsoid` | `Σ 10^(6(i-1)/(D-1)) yᵢ²` (separable) |
//! | `rotated_ellipsoid` | as `ellipsoid`, rotated |
//! | `sharp_ridge` | `y₁² + 100 √(Σ_{i≥2} yᵢ²)` |
//! | `rastrigin` | `10D + Σ (yᵢ² − 10 cos 2πyᵢ)` |
//! | `griewank` | `1 + Σ zᵢ²/4000 − Π cos(zᵢ/√i)`, `z = 100y` |
//! | `ackley` | `−20 exp(−0.2 √(Σyᵢ²/D)) − exp(Σ cos(2πyᵢ)/D) + 20 + e` |
//! | `schwefel` | `418.9829 D − Σ g(100yᵢ + 420.9687)` with the bounded `g` below |
//! | `step` | `Σ ⌊yᵢ + 0.5⌋²` |
//! | `rosenbrock` | `Σ 100(y_{i+1} − yᵢ²)² + (yᵢ − 1)²` (optimum at `y = 1`) |
//! | `discus` | `10⁶ y₁² + Σ_{i≥2} yᵢ²` |
//! | `bent_cigar` | `y₁² + 10⁶ Σ_{i≥2} yᵢ²` |
//! | `weierstrass` | `Σᵢ Σₖ 0.5ᵏ cos(2π3ᵏ(yᵢ+0.5)) − D Σₖ 0.5ᵏ cos(π3ᵏ)`, `k = 0..20` |
//! | `schaffer_f7` | `(Σ (√sᵢ + √sᵢ sin²(50 sᵢ^0.2)) / (D−1))²`, `sᵢ = √(yᵢ² + y_{i+1}²)` |
//! | `levy` | Levy function on `w = 1 + y/4` |
//! | `salomon` | `1 − cos(2π‖y‖) + 0.1 ‖y‖` |
//!
//! Schwefel's `g(z) = z sin √|z|` for `|z| ≤ 500`; outside that range the
//! argument is folded back into `[-500, 500]` and a quadratic penalty
//! `(|z| − 500)² / (10⁴ D)` is added, so the optimum stays at `y = 0`.

use std::f64::consts::{E, PI};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::SeededRng;

pub const DOMAIN_LOWER: f64 = -5.0;
pub const DOMAIN_UPPER: f64 = 5.0;

/// Axis-aligned search box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchDomain {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl SearchDomain {
    pub fn cube(dim: usize, lower: f64, upper: f64) -> Self {
        SearchDomain {
            lower: vec![lower; dim],
            upper: vec![upper; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.lower.len() != self.upper.len() {
            return Err(Error::contract("domain bounds differ in length"));
        }
        if self.lower.iter().zip(&self.upper).any(|(l, u)| !(l < u)) {
            return Err(Error::contract("domain needs lower < upper in every coordinate"));
        }
        Ok(())
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (l, u))| (l..=u).contains(&v))
    }

    pub fn midpoint(&self) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(l, u)| 0.5 * (l + u)).collect()
    }
}

/// Base benchmark functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionId {
    Sphere,
    Ellipsoid,
    RotatedEllipsoid,
    SharpRidge,
    Rastrigin,
    Griewank,
    Ackley,
    Schwefel,
    Step,
    Rosenbrock,
    Discus,
    BentCigar,
    Weierstrass,
    SchafferF7,
    Levy,
    Salomon,
}

impl FunctionId {
    pub const ALL: [FunctionId; 16] = [
        FunctionId::Sphere,
        FunctionId::Ellipsoid,
        FunctionId::RotatedEllipsoid,
        FunctionId::SharpRidge,
        FunctionId::Rastrigin,
        FunctionId::Griewank,
        FunctionId::Ackley,
        FunctionId::Schwefel,
        FunctionId::Step,
        FunctionId::Rosenbrock,
        FunctionId::Discus,
        FunctionId::BentCigar,
        FunctionId::Weierstrass,
        FunctionId::SchafferF7,
        FunctionId::Levy,
        FunctionId::Salomon,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FunctionId::Sphere => "sphere",
            FunctionId::Ellipsoid => "ellipsoid",
            FunctionId::RotatedEllipsoid => "rotated_ellipsoid",
            FunctionId::SharpRidge => "sharp_ridge",
            FunctionId::Rastrigin => "rastrigin",
            FunctionId::Griewank => "griewank",
            FunctionId::Ackley => "ackley",
            FunctionId::Schwefel => "schwefel",
            FunctionId::Step => "step",
            FunctionId::Rosenbrock => "rosenbrock",
            FunctionId::Discus => "discus",
            FunctionId::BentCigar => "bent_cigar",
            FunctionId::Weierstrass => "weierstrass",
            FunctionId::SchafferF7 => "schaffer_f7",
            FunctionId::Levy => "levy",
            FunctionId::Salomon => "salomon",
        }
    }

    /// Whether instances apply a rotation on top of the shift.
    pub fn is_rotated(self) -> bool {
        !matches!(
            self,
            FunctionId::Sphere
                | FunctionId::Ellipsoid
                | FunctionId::Schwefel
                | FunctionId::Step
                | FunctionId::Rosenbrock
        )
    }

    /// Location of the global optimum of the base function.
    pub fn base_optimum(self, dim: usize) -> Vec<f64> {
        match self {
            FunctionId::Rosenbrock => vec![1.0; dim],
            _ => vec![0.0; dim],
        }
    }

    pub fn base_value(self, y: &[f64]) -> f64 {
        let d = y.len() as f64;
        match self {
            FunctionId::Sphere => y.iter().map(|v| v * v).sum(),
            FunctionId::Ellipsoid | FunctionId::RotatedEllipsoid => ellipsoid(y),
            FunctionId::SharpRidge => {
                y[0] * y[0] + 100.0 * y[1..].iter().map(|v| v * v).sum::<f64>().sqrt()
            }
            FunctionId::Rastrigin => {
                10.0 * d + y.iter().map(|v| v * v - 10.0 * (2.0 * PI * v).cos()).sum::<f64>()
            }
            FunctionId::Griewank => {
                let mut sum = 0.0;
                let mut prod = 1.0;
                for (i, v) in y.iter().enumerate() {
                    let z = 100.0 * v;
                    sum += z * z / 4000.0;
                    prod *= (z / ((i + 1) as f64).sqrt()).cos();
                }
                1.0 + sum - prod
            }
            FunctionId::Ackley => {
                let sq = y.iter().map(|v| v * v).sum::<f64>() / d;
                let cs = y.iter().map(|v| (2.0 * PI * v).cos()).sum::<f64>() / d;
                (-20.0 * (-0.2 * sq.sqrt()).exp() - cs.exp() + 20.0 + E).max(0.0)
            }
            FunctionId::Schwefel => schwefel(y),
            FunctionId::Step => y.iter().map(|v| (v + 0.5).floor().powi(2)).sum(),
            FunctionId::Rosenbrock => y
                .windows(2)
                .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (w[0] - 1.0).powi(2))
                .sum(),
            FunctionId::Discus => 1e6 * y[0] * y[0] + y[1..].iter().map(|v| v * v).sum::<f64>(),
            FunctionId::BentCigar => y[0] * y[0] + 1e6 * y[1..].iter().map(|v| v * v).sum::<f64>(),
            FunctionId::Weierstrass => weierstrass(y),
            FunctionId::SchafferF7 => {
                let s: f64 = y
                    .windows(2)
                    .map(|w| {
                        let s = (w[0] * w[0] + w[1] * w[1]).sqrt();
                        s.sqrt() + s.sqrt() * (50.0 * s.powf(0.2)).sin().powi(2)
                    })
                    .sum();
                (s / (d - 1.0)).powi(2)
            }
            FunctionId::Levy => levy(y),
            FunctionId::Salomon => {
                let r = y.iter().map(|v| v * v).sum::<f64>().sqrt();
                1.0 - (2.0 * PI * r).cos() + 0.1 * r
            }
        }
    }
}

fn ellipsoid(y: &[f64]) -> f64 {
    let n = y.len();
    if n == 1 {
        return y[0] * y[0];
    }
    y.iter()
        .enumerate()
        .map(|(i, v)| 10f64.powf(6.0 * i as f64 / (n - 1) as f64) * v * v)
        .sum()
}

fn schwefel(y: &[f64]) -> f64 {
    let d = y.len() as f64;
    let mut acc = 0.0;
    for v in y {
        let z = 100.0 * v + 420.968_746_227_503_3;
        let g = if z.abs() <= 500.0 {
            z * z.abs().sqrt().sin()
        } else {
            let folded = 500.0 - z.abs() % 500.0;
            let folded = folded.copysign(z);
            folded * folded.abs().sqrt().sin() - (z.abs() - 500.0).powi(2) / (1e4 * d)
        };
        acc += g;
    }
    418.9829 * d - acc
}

const WEIERSTRASS_TERMS: usize = 21;

fn weierstrass(y: &[f64]) -> f64 {
    let mut offset = 0.0;
    let mut total = 0.0;
    let mut a = 1.0;
    let mut b = 1.0;
    for _ in 0..WEIERSTRASS_TERMS {
        offset += a * (PI * b).cos();
        total += y.iter().map(|v| a * (2.0 * PI * b * (v + 0.5)).cos()).sum::<f64>();
        a *= 0.5;
        b *= 3.0;
    }
    (total - y.len() as f64 * offset).max(0.0)
}

fn levy(y: &[f64]) -> f64 {
    let w: Vec<f64> = y.iter().map(|v| 1.0 + v / 4.0).collect();
    let n = w.len();
    let head = (PI * w[0]).sin().powi(2);
    let body: f64 = w[..n - 1]
        .iter()
        .map(|wi| (wi - 1.0).powi(2) * (1.0 + 10.0 * (PI * wi + 1.0).sin().powi(2)))
        .sum();
    let last = w[n - 1];
    let tail = (last - 1.0).powi(2) * (1.0 + (2.0 * PI * last).sin().powi(2));
    head + body + tail
}

impl fmt::Display for FunctionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FunctionId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FunctionId::ALL
            .iter()
            .copied()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::UnknownFunction(s.to_string()))
    }
}

/// A base function at a fixed dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub function: FunctionId,
    pub dim: usize,
}

impl ObjectiveSpec {
    pub fn new(function: FunctionId, dim: usize) -> Self {
        ObjectiveSpec { function, dim }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::contract(format!("dimension must be >= 2, got {}", self.dim)));
        }
        Ok(())
    }

    pub fn domain(&self) -> SearchDomain {
        SearchDomain::cube(self.dim, DOMAIN_LOWER, DOMAIN_UPPER)
    }
}

/// Black-box minimization target with an evaluation counter.
pub trait Objective {
    fn dim(&self) -> usize;
    fn domain(&self) -> &SearchDomain;
    /// Evaluates `x` and charges one evaluation.
    fn evaluate(&mut self, x: &[f64]) -> Result<f64>;
    /// Evaluations charged so far.
    fn evaluations(&self) -> u64;
}

/// A benchmark function fixed by `(function, dim, instance seed)`.
#[derive(Clone, Debug)]
pub struct ObjectiveInstance {
    pub spec: ObjectiveSpec,
    pub instance_seed: u64,
    shift: Vec<f64>,
    /// Row-major `dim × dim`.
    rotation: Vec<f64>,
    domain: SearchDomain,
    evals: u64,
    scratch: Vec<f64>,
}

impl ObjectiveInstance {
    pub fn shift(&self) -> &[f64] {
        &self.shift
    }

    pub fn rotation(&self) -> &[f64] {
        &self.rotation
    }

    /// Point where the instance attains the base optimum: `s + Rᵀ y*`.
    pub fn optimum(&self) -> Vec<f64> {
        let y = self.spec.function.base_optimum(self.spec.dim);
        let d = self.spec.dim;
        (0..d)
            .map(|j| self.shift[j] + (0..d).map(|i| self.rotation[i * d + j] * y[i]).sum::<f64>())
            .collect()
    }

    /// Maps `x` into base-function coordinates, `R (x - s)`.
    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.spec.dim];
        transform_into(&self.rotation, &self.shift, x, &mut out);
        out
    }
}

fn transform_into(rotation: &[f64], shift: &[f64], x: &[f64], out: &mut [f64]) {
    let d = shift.len();
    for (i, o) in out.iter_mut().enumerate() {
        let row = &rotation[i * d..(i + 1) * d];
        *o = row.iter().zip(x.iter().zip(shift)).map(|(r, (xv, s))| r * (xv - s)).sum();
    }
}

impl Objective for ObjectiveInstance {
    fn dim(&self) -> usize {
        self.spec.dim
    }

    fn domain(&self) -> &SearchDomain {
        &self.domain
    }

    fn evaluate(&mut self, x: &[f64]) -> Result<f64> {
        if x.len() != self.spec.dim {
            return Err(Error::contract(format!(
                "point has {} coordinates, objective has {}",
                x.len(),
                self.spec.dim
            )));
        }
        let mut y = std::mem::take(&mut self.scratch);
        y.resize(self.spec.dim, 0.0);
        transform_into(&self.rotation, &self.shift, x, &mut y);
        let value = self.spec.function.base_value(&y);
        self.scratch = y;
        self.evals += 1;
        Ok(value)
    }

    fn evaluations(&self) -> u64 {
        self.evals
    }
}

/// Builds the deterministic instance for `(spec, instance_seed)`.
///
/// The shift is uniform in the central 80% of the box; the rotation is the Q
/// factor (positive diagonal R) of a seeded Gaussian matrix.
pub fn make_instance(spec: ObjectiveSpec, instance_seed: u64) -> Result<ObjectiveInstance> {
    spec.validate()?;
    let d = spec.dim;
    let mut shift = vec![0.0; d];
    let mut rotation = identity(d);
    if instance_seed != 0 {
        let label = format!("instance/{}/{}", spec.function.name(), d);
        let mut rng = SeededRng::substream(instance_seed, &label);
        let half = 0.8 * 0.5 * (DOMAIN_UPPER - DOMAIN_LOWER);
        let mid = 0.5 * (DOMAIN_UPPER + DOMAIN_LOWER);
        for s in shift.iter_mut() {
            *s = mid + rng.random_range(-half..half);
        }
        if spec.function.is_rotated() {
            rotation = random_rotation(d, &mut rng);
        }
    }
    Ok(ObjectiveInstance {
        spec,
        instance_seed,
        shift,
        rotation,
        domain: spec.domain(),
        evals: 0,
        scratch: Vec::with_capacity(d),
    })
}

fn identity(d: usize) -> Vec<f64> {
    let mut m = vec![0.0; d * d];
    for i in 0..d {
        m[i * d + i] = 1.0;
    }
    m
}

/// Orthonormalizes the rows of a Gaussian matrix with modified Gram-Schmidt
/// (two passes). Row `i` of the result equals the i-th column of Q in `A = QR`
/// with `diag(R) > 0`, so the distribution is Haar.
fn random_rotation(d: usize, rng: &mut SeededRng) -> Vec<f64> {
    let mut rows: Vec<Vec<f64>> = (0..d)
        .map(|_| (0..d).map(|_| rng.sample(StandardNormal)).collect())
        .collect();
    for i in 0..d {
        for _ in 0..2 {
            for j in 0..i {
                let dot: f64 = rows[i].iter().zip(&rows[j]).map(|(a, b)| a * b).sum();
                let (head, tail) = rows.split_at_mut(i);
                for (a, b) in tail[0].iter_mut().zip(&head[j]) {
                    *a -= dot * b;
                }
            }
        }
        let norm = rows[i].iter().map(|v| v * v).sum::<f64>().sqrt();
        rows[i].iter_mut().for_each(|v| *v /= norm);
    }
    rows.into_iter().flatten().collect()
}

/// Training functions spanning separable, ill-conditioned, multimodal,
/// plateau and valley landscapes.
pub const TRAINING_FUNCTIONS: [FunctionId; 10] = [
    FunctionId::Sphere,
    FunctionId::Ellipsoid,
    FunctionId::RotatedEllipsoid,
    FunctionId::SharpRidge,
    FunctionId::Rastrigin,
    FunctionId::Griewank,
    FunctionId::Ackley,
    FunctionId::Schwefel,
    FunctionId::Step,
    FunctionId::Rosenbrock,
];

/// Held-out functions, disjoint from [`TRAINING_FUNCTIONS`].
pub const HOLDOUT_FUNCTIONS: [FunctionId; 6] = [
    FunctionId::Discus,
    FunctionId::BentCigar,
    FunctionId::Weierstrass,
    FunctionId::SchafferF7,
    FunctionId::Levy,
    FunctionId::Salomon,
];

pub const CAMPAIGN_DIMS: [usize; 6] = [2, 10, 20, 30, 40, 50];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Training,
    Holdout,
}

impl Suite {
    pub fn functions(self) -> &'static [FunctionId] {
        match self {
            Suite::Training => &TRAINING_FUNCTIONS,
            Suite::Holdout => &HOLDOUT_FUNCTIONS,
        }
    }

    /// Every function of the suite at every requested dimension.
    pub fn specs(self, dims: &[usize]) -> Vec<ObjectiveSpec> {
        self.functions()
            .iter()
            .flat_map(|&f| dims.iter().map(move |&d| ObjectiveSpec::new(f, d)))
            .collect()
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "training" => Ok(Suite::Training),
            "holdout" => Ok(Suite::Holdout),
            other => Err(Error::Config(format!("unknown suite `{other}`"))),
        }
    }
}

pub fn training_suite() -> Vec<ObjectiveSpec> {
    Suite::Training.specs(&CAMPAIGN_DIMS)
}

pub fn holdout_suite() -> Vec<ObjectiveSpec> {
    Suite::Holdout.specs(&CAMPAIGN_DIMS)
}

#[derive(Serialize)]
struct SuiteEntry<'a> {
    function_id: &'static str,
    dim: usize,
    lower: &'a [f64],
    upper: &'a [f64],
}

/// JSON listing `[{function_id, dim, lower, upper}, ...]` of a suite.
pub fn suite_listing(specs: &[ObjectiveSpec]) -> serde_json::Value {
    let domains: Vec<SearchDomain> = specs.iter().map(|s| s.domain()).collect();
    let entries: Vec<SuiteEntry<'_>> = specs
        .iter()
        .zip(&domains)
        .map(|(s, d)| SuiteEntry {
            function_id: s.function.name(),
            dim: s.dim,
            lower: &d.lower,
            upper: &d.upper,
        })
        .collect();
    serde_json::to_value(entries).expect("suite listing serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(f: FunctionId, x: &[f64]) -> f64 {
        let mut inst = make_instance(ObjectiveSpec::new(f, x.len()), 0).unwrap();
        inst.evaluate(x).unwrap()
    }

    #[test]
    fn seed_zero_is_identity() {
        let inst = make_instance(ObjectiveSpec::new(FunctionId::Sphere, 3), 0).unwrap();
        assert_eq!(inst.shift(), &[0.0; 3]);
        assert_eq!(inst.rotation(), identity(3).as_slice());
    }

    #[test]
    fn known_values() {
        assert_eq!(eval(FunctionId::Sphere, &[1.0, 1.0, 1.0]), 3.0);
        assert_eq!(eval(FunctionId::Rastrigin, &[0.0; 4]), 0.0);
        assert_eq!(eval(FunctionId::Rosenbrock, &[1.0, 1.0]), 0.0);
    }

    #[test]
    fn base_optima_are_near_zero() {
        for f in FunctionId::ALL {
            for d in [2, 7] {
                let v = f.base_value(&f.base_optimum(d));
                assert!(v.abs() < 1e-3 && v >= 0.0, "{f} at D={d}: {v}");
            }
        }
    }

    #[test]
    fn shifted_sphere_is_zero_at_shift() {
        let mut inst = make_instance(ObjectiveSpec::new(FunctionId::Sphere, 3), 7).unwrap();
        let s = inst.shift().to_vec();
        assert_ne!(s, vec![0.0; 3]);
        assert_eq!(inst.evaluate(&s).unwrap(), 0.0);
    }

    #[test]
    fn instances_are_reproducible() {
        let spec = ObjectiveSpec::new(FunctionId::Rastrigin, 2);
        let a = make_instance(spec, 5).unwrap();
        let b = make_instance(spec, 5).unwrap();
        assert_eq!(a.shift(), b.shift());
        assert_eq!(a.rotation(), b.rotation());
        let c = make_instance(spec, 6).unwrap();
        assert_ne!(a.shift(), c.shift());
    }

    #[test]
    fn rotation_is_orthogonal() {
        for d in [2, 10, 50] {
            let inst = make_instance(ObjectiveSpec::new(FunctionId::Rastrigin, d), 3).unwrap();
            let r = inst.rotation();
            for i in 0..d {
                for j in 0..d {
                    let dot: f64 = (0..d).map(|k| r[k * d + i] * r[k * d + j]).sum();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((dot - want).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn shift_inside_central_region() {
        for seed in 1..50 {
            let inst = make_instance(ObjectiveSpec::new(FunctionId::Ackley, 10), seed).unwrap();
            assert!(inst.shift().iter().all(|s| s.abs() < 4.0));
        }
    }

    #[test]
    fn instance_matches_base_under_inverse_transform() {
        let mut rng = SeededRng::new(1);
        for f in FunctionId::ALL {
            let mut inst = make_instance(ObjectiveSpec::new(f, 6), 11).unwrap();
            let d = 6;
            for _ in 0..100 {
                let y: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
                let r = inst.rotation().to_vec();
                let x: Vec<f64> = (0..d)
                    .map(|j| inst.shift()[j] + (0..d).map(|i| r[i * d + j] * y[i]).sum::<f64>())
                    .collect();
                let got = inst.evaluate(&x).unwrap();
                let want = f.base_value(&y);
                assert!(
                    (got - want).abs() <= 1e-9 * want.abs().max(1.0),
                    "{f}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn optimum_preserved_under_shift() {
        for f in FunctionId::ALL.into_iter().filter(|f| !f.is_rotated()) {
            let mut inst = make_instance(ObjectiveSpec::new(f, 5), 4).unwrap();
            let x = inst.optimum();
            let base = f.base_value(&f.base_optimum(5));
            assert!((inst.evaluate(&x).unwrap() - base).abs() < 1e-9, "{f}");
        }
    }

    #[test]
    fn counter_counts_every_evaluation() {
        let mut inst = make_instance(ObjectiveSpec::new(FunctionId::Griewank, 4), 2).unwrap();
        for n in 1..=25 {
            inst.evaluate(&[0.1; 4]).unwrap();
            assert_eq!(inst.evaluations(), n);
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let mut inst = make_instance(ObjectiveSpec::new(FunctionId::Sphere, 3), 0).unwrap();
        assert!(matches!(inst.evaluate(&[1.0, 2.0]), Err(Error::Contract(_))));
        assert_eq!(inst.evaluations(), 0);
    }

    #[test]
    fn suites_are_disjoint_and_total() {
        let train = training_suite();
        let hold = holdout_suite();
        assert!(TRAINING_FUNCTIONS.len() >= 10);
        assert!(HOLDOUT_FUNCTIONS.len() >= 5);
        assert!(train.iter().all(|s| !hold.contains(s)));
        for spec in train.iter().chain(&hold).filter(|s| s.dim == 2 || s.dim == 50) {
            let mut inst = make_instance(*spec, 1).unwrap();
            let v = inst.evaluate(&spec.domain().midpoint()).unwrap();
            assert!(v.is_finite(), "{spec:?}");
        }
    }

    #[test]
    fn unknown_function_name() {
        assert!(matches!("bbob_f25".parse::<FunctionId>(), Err(Error::UnknownFunction(_))));
        for f in FunctionId::ALL {
            assert_eq!(f.name().parse::<FunctionId>().unwrap(), f);
        }
    }

    #[test]
    fn listing_has_domain() {
        let v = suite_listing(&[ObjectiveSpec::new(FunctionId::Step, 2)]);
        assert_eq!(v[0]["function_id"], "step");
        assert_eq!(v[0]["dim"], 2);
        assert_eq!(v[0]["lower"][1], -5.0);
    }
}
