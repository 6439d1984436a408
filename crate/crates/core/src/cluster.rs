//! k-means++ seeding, Lloyd iteration and nearest-centroid classification.
//!
//! Points are optionally z-scored per feature before clustering; centroids and
//! inertia live in that scaled space.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use tracing::warn;

use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::sampling::SeededRng;

/// Per-feature `(x − mean) / sd` standardization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

impl Scaler {
    pub fn identity(dim: usize) -> Self {
        Scaler {
            mean: vec![0.0; dim],
            sd: vec![1.0; dim],
        }
    }

    /// Population statistics of `points`; a constant feature gets `sd = 1`.
    pub fn fit(points: &[Vec<f64>]) -> Self {
        let dim = points[0].len();
        let n = points.len() as f64;
        let mut mean = vec![0.0; dim];
        for p in points {
            for (m, v) in mean.iter_mut().zip(p) {
                *m += v / n;
            }
        }
        let mut sd = vec![0.0; dim];
        for p in points {
            for j in 0..dim {
                sd[j] += (p[j] - mean[j]).powi(2) / n;
            }
        }
        for s in sd.iter_mut() {
            *s = s.sqrt();
            if !(*s > 0.0) {
                *s = 1.0;
            }
        }
        Scaler { mean, sd }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.mean.iter().zip(&self.sd))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    pub fn invert(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .zip(self.mean.iter().zip(&self.sd))
            .map(|(v, (m, s))| v * s + m)
            .collect()
    }
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest centroid and its squared distance; ties go to the lowest index.
pub fn nearest(centroids: &[Vec<f64>], x: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centroids.iter().enumerate() {
        let d = squared_distance(c, x);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

/// k-means++ seeding: the first centroid uniformly, each next with probability
/// proportional to its squared distance to the nearest chosen centroid. When
/// every remaining distance is zero the draw falls back to uniform.
pub fn kmeanspp_seed(points: &[Vec<f64>], k: usize, rng: &mut SeededRng) -> Result<Vec<Vec<f64>>> {
    kmeanspp_seed_weighted(points, &vec![1.0; points.len()], k, rng)
}

/// [`kmeanspp_seed`] over points carrying multiplicities.
pub fn kmeanspp_seed_weighted(
    points: &[Vec<f64>],
    weights: &[f64],
    k: usize,
    rng: &mut SeededRng,
) -> Result<Vec<Vec<f64>>> {
    if points.is_empty() || k == 0 {
        return Err(Error::contract("k-means++ needs k >= 1 and at least one point"));
    }
    let k = if k > points.len() {
        warn!(k, points = points.len(), "k exceeds point count; reducing k");
        points.len()
    } else {
        k
    };
    let first = draw(weights, rng).expect("positive weights");
    let mut centroids = vec![points[first].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| squared_distance(p, &centroids[0])).collect();
    while centroids.len() < k {
        let mass: Vec<f64> = d2.iter().zip(weights).map(|(d, w)| d * w).collect();
        let pick = draw(&mass, rng).unwrap_or_else(|| rng.random_range(0..points.len()));
        let c = points[pick].clone();
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(squared_distance(p, &c));
        }
        centroids.push(c);
    }
    Ok(centroids)
}

/// Index drawn with probability proportional to `mass`, or `None` when it sums to zero.
fn draw(mass: &[f64], rng: &mut SeededRng) -> Option<usize> {
    let total: f64 = mass.iter().sum();
    if !(total > 0.0) {
        return None;
    }
    let mut target = rng.random::<f64>() * total;
    let mut chosen = mass.len() - 1;
    for (i, &w) in mass.iter().enumerate() {
        if w > 0.0 && target < w {
            chosen = i;
            break;
        }
        target -= w;
    }
    // Floating leftovers must not land on a zero-mass entry.
    if mass[chosen] == 0.0 {
        chosen = mass.iter().rposition(|&w| w > 0.0).expect("positive total");
    }
    Some(chosen)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LloydResult {
    pub centroids: Vec<Vec<f64>>,
    pub assignments: Vec<usize>,
    pub inertia: f64,
    /// Inertia after each assignment step.
    pub inertia_history: Vec<f64>,
    pub iterations: usize,
}

pub const DEFAULT_MAX_ITER: usize = 300;
pub const DEFAULT_TOL: f64 = 1e-9;

fn assign(points: &[Vec<f64>], centroids: &[Vec<f64>]) -> (Vec<usize>, Vec<f64>) {
    points.iter().map(|p| nearest(centroids, p)).unzip()
}

/// Alternates assignment and mean update until no centroid moves by `tol` or
/// more, or `max_iter` iterations ran. A cluster left empty is re-seeded at the
/// point farthest from its current centroid.
pub fn lloyd(points: &[Vec<f64>], initial: Vec<Vec<f64>>, max_iter: usize, tol: f64) -> LloydResult {
    lloyd_weighted(points, &vec![1.0; points.len()], initial, max_iter, tol)
}

/// [`lloyd`] over points carrying multiplicities; inertia and means are weighted.
pub fn lloyd_weighted(
    points: &[Vec<f64>],
    weights: &[f64],
    initial: Vec<Vec<f64>>,
    max_iter: usize,
    tol: f64,
) -> LloydResult {
    assert!(!initial.is_empty(), "lloyd needs at least one centroid");
    let dim = points[0].len();
    let k = initial.len();
    let mut centroids = initial;
    let mut history = Vec::new();
    let mut iterations = 0;
    loop {
        let (mut assignments, mut d2) = assign(points, &centroids);
        history.push(weighted_sum(&d2, weights));
        iterations += 1;

        let mut counts = vec![0usize; k];
        for &a in &assignments {
            counts[a] += 1;
        }
        for c in 0..k {
            if counts[c] > 0 {
                continue;
            }
            // Take the farthest point from a cluster that can spare one.
            let Some(far) = d2
                .iter()
                .enumerate()
                .filter(|(i, _)| counts[assignments[*i]] > 1)
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, _)| i)
            else {
                continue;
            };
            counts[assignments[far]] -= 1;
            assignments[far] = c;
            counts[c] = 1;
            d2[far] = 0.0;
        }

        let mut next = vec![vec![0.0; dim]; k];
        let mut mass = vec![0.0; k];
        for ((p, &a), &w) in points.iter().zip(&assignments).zip(weights) {
            mass[a] += w;
            for (s, v) in next[a].iter_mut().zip(p) {
                *s += w * v;
            }
        }
        for (c, (m, old)) in next.iter_mut().zip(mass.iter().zip(&centroids)) {
            if *m == 0.0 {
                c.clone_from(old);
            } else {
                c.iter_mut().for_each(|v| *v /= *m);
            }
        }
        let shift = centroids
            .iter()
            .zip(&next)
            .map(|(a, b)| squared_distance(a, b).sqrt())
            .fold(0.0, f64::max);
        centroids = next;
        if shift < tol || iterations >= max_iter {
            break;
        }
    }
    let (assignments, d2) = assign(points, &centroids);
    let inertia = weighted_sum(&d2, weights);
    LloydResult {
        centroids,
        assignments,
        inertia,
        inertia_history: history,
        iterations,
    }
}

fn weighted_sum(values: &[f64], weights: &[f64]) -> f64 {
    values.iter().zip(weights).map(|(v, w)| v * w).sum()
}

/// Collapses bit-identical points into one entry with a multiplicity.
fn collapse_duplicates(points: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut unique = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    for p in points {
        let key: Vec<u64> = p.iter().map(|v| v.to_bits()).collect();
        match index.get(&key) {
            Some(&i) => weights[i] += 1.0,
            None => {
                index.insert(key, unique.len());
                unique.push(p.clone());
                weights.push(1.0);
            }
        }
    }
    (unique, weights)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub restarts: usize,
    pub max_iter: usize,
    pub tol: f64,
    /// z-score features before clustering.
    pub scale: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            restarts: 10,
            max_iter: DEFAULT_MAX_ITER,
            tol: DEFAULT_TOL,
            scale: true,
        }
    }
}

/// Fitted clustering of feature space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel {
    pub k: usize,
    pub scaler: Scaler,
    /// Centroids in scaled space.
    pub centroids: Vec<Vec<f64>>,
    pub inertia: f64,
}

impl ClusterModel {
    /// Best-of-`restarts` k-means++/Lloyd fit. `k` is clamped to the point count.
    pub fn fit_points(points: &[Vec<f64>], k: usize, opts: &FitOptions, rng: &mut SeededRng) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::NoData);
        }
        let scaler = if opts.scale {
            Scaler::fit(points)
        } else {
            Scaler::identity(points[0].len())
        };
        let scaled: Vec<Vec<f64>> = points.iter().map(|p| scaler.apply(p)).collect();
        // Stores repeat each β once per parameter set; cluster the distinct
        // locations with multiplicities instead.
        let (unique, weights) = collapse_duplicates(&scaled);
        if k > unique.len() {
            warn!(k, distinct = unique.len(), "k exceeds distinct point count; reducing k");
        }
        let k = k.clamp(1, unique.len());
        let mut best: Option<LloydResult> = None;
        for _ in 0..opts.restarts.max(1) {
            let seeds = kmeanspp_seed_weighted(&unique, &weights, k, rng)?;
            let run = lloyd_weighted(&unique, &weights, seeds, opts.max_iter, opts.tol);
            if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
                best = Some(run);
            }
        }
        let best = best.expect("at least one restart");
        Ok(ClusterModel {
            k,
            scaler,
            centroids: best.centroids,
            inertia: best.inertia,
        })
    }

    pub fn fit(features: &[FeatureVector], k: usize, opts: &FitOptions, rng: &mut SeededRng) -> Result<Self> {
        let points: Vec<Vec<f64>> = features.iter().map(|f| f.as_array().to_vec()).collect();
        Self::fit_points(&points, k, opts, rng)
    }

    pub fn classify_point(&self, x: &[f64]) -> usize {
        nearest(&self.centroids, &self.scaler.apply(x)).0
    }

    pub fn classify(&self, beta: &FeatureVector) -> usize {
        self.classify_point(&beta.as_array())
    }

    /// Centroid `i` mapped back to unscaled feature space.
    pub fn centroid_unscaled(&self, i: usize) -> Vec<f64> {
        self.scaler.invert(&self.centroids[i])
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Config(format!("cluster model: {e}")))
    }
}
