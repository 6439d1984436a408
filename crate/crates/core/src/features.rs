//! The three-component landscape feature vector.
//!
//! `β₁` is the dimension, `β₂` the interquartile range and `β₃` the skewness of
//! the z-scored objective values over a Latin hypercube sample of σ points.

use serde::{Deserialize, Serialize};

use crate::bench::Objective;
use crate::error::{Error, Result};
use crate::sampling::{latin_hypercube, SeededRng};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    /// Dimension count.
    pub beta1: f64,
    /// IQR of the normalized sample.
    pub beta2: f64,
    /// Skewness of the normalized sample.
    pub beta3: f64,
}

impl FeatureVector {
    pub fn new(beta1: f64, beta2: f64, beta3: f64) -> Self {
        FeatureVector { beta1, beta2, beta3 }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.beta1, self.beta2, self.beta3]
    }

    pub fn is_finite(&self) -> bool {
        self.as_array().iter().all(|v| v.is_finite())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureConfig {
    /// Sample count σ.
    pub sigma: usize,
    pub seed: u64,
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sigma < 2 {
            return Err(Error::contract(format!("sigma must be >= 2, got {}", self.sigma)));
        }
        Ok(())
    }
}

/// Samples the objective σ times on a Latin hypercube and summarizes it.
/// Charges exactly σ evaluations.
pub fn extract_features<O: Objective + ?Sized>(objective: &mut O, cfg: &FeatureConfig) -> Result<FeatureVector> {
    cfg.validate()?;
    let mut rng = SeededRng::substream(cfg.seed, "features");
    let design = latin_hypercube(cfg.sigma, objective.domain(), &mut rng)?;
    let values = design
        .points
        .iter()
        .map(|x| objective.evaluate(x))
        .collect::<Result<Vec<f64>>>()?;
    features_from_values(objective.dim(), &values)
}

/// Feature vector of an already-evaluated sample.
pub fn features_from_values(dim: usize, values: &[f64]) -> Result<FeatureVector> {
    if values.len() < 2 {
        return Err(Error::contract("feature sample needs at least two values"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::contract("feature sample contains a non-finite value"));
    }
    let z = zscore(values);
    Ok(FeatureVector {
        beta1: dim as f64,
        beta2: iqr(&z)?,
        beta3: skew(&z)?,
    })
}

/// Standardizes with the sample (n − 1) standard deviation. A constant sample maps to zeros.
pub fn zscore(values: &[f64]) -> Vec<f64> {
    // The rounded mean of identical values can differ from them by an ulp.
    if is_constant(values) {
        return vec![0.0; values.len()];
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let sd = var.sqrt();
    if sd == 0.0 || !sd.is_finite() {
        return vec![0.0; values.len()];
    }
    values.iter().map(|v| (v - mean) / sd).collect()
}

fn is_constant(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[0] == w[1])
}

/// Quantile by linear interpolation between order statistics: with sorted
/// `x₀ ≤ … ≤ x_{n−1}` and `h = (n − 1) q`, `Q(q) = x_⌊h⌋ + (h − ⌊h⌋)(x_⌊h⌋₊₁ − x_⌊h⌋)`.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn iqr(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::contract("iqr needs at least two values"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25))
}

/// Biased moment skewness `g₁ = m₃ / m₂^{3/2}`; 0 for a constant sample.
pub fn skew(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::contract("skew needs at least two values"));
    }
    if is_constant(values) {
        return Ok(0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let (m2, m3) = values.iter().fold((0.0, 0.0), |(m2, m3), v| {
        let d = v - mean;
        (m2 + d * d, m3 + d * d * d)
    });
    let (m2, m3) = (m2 / n, m3 / n);
    if m2 == 0.0 {
        return Ok(0.0);
    }
    Ok(m3 / m2.powf(1.5))
}
