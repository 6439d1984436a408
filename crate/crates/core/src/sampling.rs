//! Seeded randomness and Latin hypercube designs.
//!
//! Every random draw in the crate goes through [`SeededRng`], a ChaCha8 stream.
//! Independent sub-streams are addressed by `(seed, label)`: the seed selects
//! the key and a 64-bit FNV-1a hash of the label selects the ChaCha stream id,
//! so sub-streams never share keystream.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bench::SearchDomain;
use crate::de::ControlParams;
use crate::error::{Error, Result};

/// The crate-wide deterministic PRNG (ChaCha8).
#[derive(Clone, Debug)]
pub struct SeededRng(ChaCha8Rng);

impl SeededRng {
    pub const ALGORITHM: &'static str = "chacha8";

    pub fn new(seed: u64) -> Self {
        SeededRng(ChaCha8Rng::seed_from_u64(seed))
    }

    /// An independent stream derived from `seed` and a textual label.
    pub fn substream(seed: u64, label: &str) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(fnv1a(label.as_bytes()));
        SeededRng(rng)
    }

    /// A child stream drawn from this one, labelled for readability at the call site.
    pub fn fork(&mut self, label: &str) -> Self {
        let seed = self.0.next_u64();
        Self::substream(seed, label)
    }
}

impl RngCore for SeededRng {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.0.fill_bytes(dst)
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// An `n × d` Latin hypercube design inside a box.
#[derive(Clone, Debug, PartialEq)]
pub struct LhsDesign {
    pub points: Vec<Vec<f64>>,
    pub dim: usize,
}

impl LhsDesign {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Index of the stratum `x` falls into when `[lower, upper)` is cut into `n` equal parts.
pub fn stratum_index(x: f64, lower: f64, upper: f64, n: usize) -> usize {
    let k = ((x - lower) / (upper - lower) * n as f64).floor();
    (k.max(0.0) as usize).min(n - 1)
}

/// Jittered Latin hypercube: per dimension a random permutation of the `n`
/// strata, each point placed uniformly inside its stratum.
pub fn latin_hypercube(n: usize, domain: &SearchDomain, rng: &mut SeededRng) -> Result<LhsDesign> {
    if n == 0 {
        return Err(Error::contract("latin hypercube needs at least one sample"));
    }
    let dim = domain.dim();
    let mut points = vec![vec![0.0; dim]; n];
    let mut perm: Vec<usize> = (0..n).collect();
    for j in 0..dim {
        let (lo, hi) = (domain.lower[j], domain.upper[j]);
        let width = (hi - lo) / n as f64;
        shuffle(&mut perm, rng);
        for (point, &k) in points.iter_mut().zip(&perm) {
            let t: f64 = rng.random();
            let mut x = lo + (k as f64 + t) * width;
            // Rounding can push a jittered point onto the next stratum's edge.
            if stratum_index(x, lo, hi, n) != k {
                x = lo + (k as f64 + 0.5) * width;
            }
            point[j] = x;
        }
    }
    Ok(LhsDesign { points, dim })
}

fn shuffle(v: &mut [usize], rng: &mut SeededRng) {
    for i in (1..v.len()).rev() {
        let j = rng.random_range(0..=i);
        v.swap(i, j);
    }
}

/// Box for the DE control parameters sampled during training.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamRanges {
    pub crossover: (f64, f64),
    pub weight: (f64, f64),
    pub population: (f64, f64),
}

impl Default for ParamRanges {
    fn default() -> Self {
        ParamRanges {
            crossover: (0.0, 1.0),
            weight: (0.1, 1.0),
            population: (10.0, 500.0),
        }
    }
}

impl ParamRanges {
    fn domain(&self) -> SearchDomain {
        SearchDomain {
            lower: vec![self.crossover.0, self.weight.0, self.population.0],
            upper: vec![self.crossover.1, self.weight.1, self.population.1],
        }
    }
}

/// Latin hypercube over the parameter box. Population sizes are rounded to
/// the nearest integer and floored at [`ControlParams::MIN_POPULATION`].
pub fn lhs_params(n: usize, ranges: &ParamRanges, rng: &mut SeededRng) -> Result<Vec<ControlParams>> {
    let domain = ranges.domain();
    domain.validate()?;
    let design = latin_hypercube(n, &domain, rng)?;
    Ok(design
        .points
        .iter()
        .map(|p| ControlParams {
            crossover: p[0],
            weight: p[1],
            population: (p[2].round() as usize).max(ControlParams::MIN_POPULATION),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(d: usize) -> SearchDomain {
        SearchDomain::cube(d, 0.0, 1.0)
    }

    #[test]
    fn zero_samples_is_a_contract_error() {
        let mut rng = SeededRng::new(1);
        assert!(matches!(latin_hypercube(0, &unit(2), &mut rng), Err(Error::Contract(_))));
    }

    #[test]
    fn single_point_lies_in_box() {
        let domain = SearchDomain::cube(4, -5.0, 5.0);
        let design = latin_hypercube(1, &domain, &mut SeededRng::new(3)).unwrap();
        assert!(domain.contains(&design.points[0]));
    }

    #[test]
    fn quartiles_each_hit_once() {
        let design = latin_hypercube(4, &unit(1), &mut SeededRng::new(9)).unwrap();
        let mut hits = [0; 4];
        for p in &design.points {
            hits[stratum_index(p[0], 0.0, 1.0, 4)] += 1;
        }
        assert_eq!(hits, [1; 4]);
    }

    #[test]
    fn same_seed_same_design() {
        let a = latin_hypercube(100, &unit(3), &mut SeededRng::new(42)).unwrap();
        let b = latin_hypercube(100, &unit(3), &mut SeededRng::new(42)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn substreams_differ_by_label() {
        let mut a = SeededRng::substream(5, "features");
        let mut b = SeededRng::substream(5, "de");
        assert_ne!(a.next_u64(), b.next_u64());
        let mut c = SeededRng::substream(5, "features");
        let mut a2 = SeededRng::substream(5, "features");
        assert_eq!(c.next_u64(), a2.next_u64());
    }

    #[test]
    fn thirty_param_sets_in_range_and_distinct() {
        let ranges = ParamRanges::default();
        let params = lhs_params(30, &ranges, &mut SeededRng::new(7)).unwrap();
        assert_eq!(params.len(), 30);
        for p in &params {
            assert!((0.0..=1.0).contains(&p.crossover));
            assert!((0.1..=1.0).contains(&p.weight));
            assert!((10..=500).contains(&p.population));
        }
        for i in 0..params.len() {
            for j in i + 1..params.len() {
                assert_ne!(params[i], params[j]);
            }
        }
        assert_eq!(params, lhs_params(30, &ranges, &mut SeededRng::new(7)).unwrap());
    }

    #[test]
    fn single_param_set_inside_ranges() {
        let p = &lhs_params(1, &ParamRanges::default(), &mut SeededRng::new(0)).unwrap()[0];
        assert!(p.validate().is_ok());
        assert!((10..=500).contains(&p.population));
    }

    #[test]
    fn marginal_means_near_midpoint() {
        let n = 10_000;
        let design = latin_hypercube(n, &unit(3), &mut SeededRng::new(11)).unwrap();
        // Uniform on [0,1]: sd of the mean is 1/sqrt(12 n).
        let three_sigma = 3.0 / (12.0 * n as f64).sqrt();
        for j in 0..3 {
            let mean = design.points.iter().map(|p| p[j]).sum::<f64>() / n as f64;
            assert!((mean - 0.5).abs() < three_sigma, "dim {j}: mean {mean}");
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]
            #[test]
            fn every_stratum_hit_exactly_once(n in 1usize..=1000, d in 1usize..=50, seed: u64) {
                let domain = SearchDomain::cube(d, -3.0, 7.5);
                let design = latin_hypercube(n, &domain, &mut SeededRng::new(seed)).unwrap();
                for j in 0..d {
                    let mut hits = vec![0u32; n];
                    for p in &design.points {
                        hits[stratum_index(p[j], -3.0, 7.5, n)] += 1;
                    }
                    prop_assert!(hits.iter().all(|&h| h == 1));
                }
            }
        }
    }
}
