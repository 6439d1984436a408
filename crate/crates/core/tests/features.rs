use proptest::prelude::*;
use rand::Rng;
use tuneseer::bench::{make_instance, FunctionId, Objective, ObjectiveSpec, SearchDomain};
use tuneseer::features::{extract_features, features_from_values, iqr, skew, FeatureConfig};
use tuneseer::{Result, SeededRng};

/// Type-7 quantile computed independently of the library.
fn oracle_quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[test]
fn sphere_iqr_matches_monte_carlo() {
    // Reference: 10⁶ uniform draws of Σx² over [-5,5]², z-scored with the sample SD.
    let mut rng = SeededRng::new(99);
    let n = 1_000_000;
    let mut v: Vec<f64> = (0..n)
        .map(|_| {
            let a: f64 = rng.random_range(-5.0..5.0);
            let b: f64 = rng.random_range(-5.0..5.0);
            a * a + b * b
        })
        .collect();
    let mean = v.iter().sum::<f64>() / n as f64;
    let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    v.sort_by(f64::total_cmp);
    let reference = (oracle_quantile(&v, 0.75) - oracle_quantile(&v, 0.25)) / sd;

    let mut inst = make_instance(ObjectiveSpec::new(FunctionId::Sphere, 2), 0).unwrap();
    let beta = extract_features(&mut inst, &FeatureConfig { sigma: 10_000, seed: 3 }).unwrap();
    assert_eq!(beta.beta1, 2.0);
    assert!((beta.beta2 - reference).abs() < 0.05, "{} vs {}", beta.beta2, reference);
    assert_eq!(inst.evaluations(), 10_000);
}

#[test]
fn constant_objective_has_degenerate_features() {
    struct Flat(SearchDomain, u64);
    impl Objective for Flat {
        fn dim(&self) -> usize {
            self.0.dim()
        }
        fn domain(&self) -> &SearchDomain {
            &self.0
        }
        fn evaluate(&mut self, _x: &[f64]) -> Result<f64> {
            self.1 += 1;
            Ok(4.2)
        }
        fn evaluations(&self) -> u64 {
            self.1
        }
    }
    let mut f = Flat(SearchDomain::cube(5, -5.0, 5.0), 0);
    let beta = extract_features(&mut f, &FeatureConfig { sigma: 50, seed: 1 }).unwrap();
    assert_eq!(beta.as_array(), [5.0, 0.0, 0.0]);
}

#[test]
fn hand_examples() {
    assert!((iqr(&[1.0, 2.0, 3.0, 4.0]).unwrap() - 1.5).abs() < 1e-12);
    assert_eq!(iqr(&[5.0; 4]).unwrap(), 0.0);
    assert!(skew(&[-1.0, 0.0, 1.0, -1.0, 0.0, 1.0]).unwrap().abs() < 1e-12);
    // Central-moment oracle for [0,0,1]: m2 = 2/9, m3 = 2/27.
    let m2: f64 = 2.0 / 9.0;
    let m3: f64 = 2.0 / 27.0;
    assert!((skew(&[0.0, 0.0, 1.0]).unwrap() - m3 / m2.powf(1.5)).abs() < 1e-12);
    assert!(iqr(&[1.0]).is_err());
    assert!(skew(&[1.0]).is_err());
}

#[test]
fn negating_values_flips_skew() {
    let v: Vec<f64> = (0..200).map(|i| ((i as f64) * 0.37).exp().sin() + (i as f64 * 0.01).powi(3)).collect();
    let neg: Vec<f64> = v.iter().map(|x| -x).collect();
    let a = features_from_values(3, &v).unwrap();
    let b = features_from_values(3, &neg).unwrap();
    assert!((a.beta3 + b.beta3).abs() < 1e-10);
    assert!((a.beta2 - b.beta2).abs() < 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn affine_invariance(
        v in prop::collection::vec(-1e3f64..1e3, 5..200),
        a in 0.01f64..100.0,
        b in -1e3f64..1e3,
    ) {
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        prop_assume!(v.iter().map(|x| (x - mean).abs()).fold(0.0, f64::max) > 1e-3);
        let w: Vec<f64> = v.iter().map(|x| a * x + b).collect();
        let f1 = features_from_values(4, &v).unwrap();
        let f2 = features_from_values(4, &w).unwrap();
        prop_assert!((f1.beta2 - f2.beta2).abs() < 1e-10);
        prop_assert!((f1.beta3 - f2.beta3).abs() < 1e-10);
    }

    #[test]
    fn iqr_translation_and_skew_scale(
        v in prop::collection::vec(-100f64..100.0, 3..60),
        c in -50f64..50.0,
    ) {
        let shifted: Vec<f64> = v.iter().map(|x| x + c).collect();
        prop_assert!((iqr(&v).unwrap() - iqr(&shifted).unwrap()).abs() < 1e-9);
        let doubled: Vec<f64> = v.iter().map(|x| 2.0 * x).collect();
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        prop_assume!(v.iter().map(|x| (x - mean).abs()).fold(0.0, f64::max) > 1e-3);
        prop_assert!((skew(&v).unwrap() - skew(&doubled).unwrap()).abs() < 1e-9);
    }
}
