use aural_core::features::{
    denormalize, extract_features, fault_frequencies, normalize, segment, window_count, window_geometry, BearingGeometry,
    FaultFrequencies, FeatureOptions, FeatureVector, NormalizationStats, DEFAULT_SHAFT_HZ, N_FEATURES,
};
use aural_core::signal::TimeSeries;
use aural_core::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ff() -> FaultFrequencies {
    fault_frequencies(&BearingGeometry::default(), DEFAULT_SHAFT_HZ).unwrap()
}

/// Noise with a few impulses so every feature is well away from zero.
fn test_signal(seed: u64, n: usize) -> TimeSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    for _ in 0..5 {
        let i = rng.gen_range(0..n);
        x[i] += rng.gen_range(3.0..6.0);
    }
    TimeSeries::new(x, 8192.0).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn scale_covariance(seed in 0u64..10_000, a in 0.01f64..100.0, envelope: bool) {
        let opts = FeatureOptions { envelope, ..FeatureOptions::default() };
        let x = test_signal(seed, 4096);
        let y = x.scaled(a).unwrap();
        let fx = extract_features(&x, &ff(), &opts).unwrap();
        let fy = extract_features(&y, &ff(), &opts).unwrap();
        let degree = [1, 2, 1, 1, 0, 0, 0, 0, 0, 0, 1, 1, 1, 2];
        for i in 0..N_FEATURES {
            let expected = fx.values[i] * a.powi(degree[i]);
            prop_assert!(close(fy.values[i], expected, 1e-9), "f{}: {} vs {}", i + 1, fy.values[i], expected);
        }
    }

    #[test]
    fn definitional_identities(seed in 0u64..10_000, n in 128usize..3000) {
        let x = test_signal(seed, n.max(50));
        let f = extract_features(&x, &ff(), &FeatureOptions::default()).unwrap();
        let v = f.values;
        let mean_abs = x.samples().iter().map(|s| s.abs()).sum::<f64>() / x.len() as f64;
        prop_assert!(close(v[6] * v[2], v[3], 1e-9));
        prop_assert!(close(v[8] * mean_abs, v[3], 1e-9));
        prop_assert!(close(v[7] * mean_abs, v[2], 1e-9));
        prop_assert!(close(v[1], x.samples().iter().map(|s| (s - v[0]).powi(2)).sum::<f64>() / x.len() as f64, 1e-9));
    }

    #[test]
    fn normalization_statistics(seed in 0u64..10_000, rows in 2usize..60, offset in -1e3f64..1e3, spread in 1e-3f64..1e3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let input: Vec<FeatureVector> = (0..rows)
            .map(|i| {
                let mut values = [0.0; N_FEATURES];
                for v in values.iter_mut() {
                    *v = offset + spread * rng.gen_range(-1.0..1.0);
                }
                FeatureVector { values, label: None, window_index: i }
            })
            .collect();
        let (out, stats) = match normalize(&input) {
            Ok(r) => r,
            Err(Error::ConstantFeature(_)) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        for j in 0..N_FEATURES {
            let col: Vec<f64> = out.iter().map(|r| r.values[j]).collect();
            let m = col.iter().sum::<f64>() / rows as f64;
            let s = (col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / rows as f64).sqrt();
            prop_assert!(m.abs() < 1e-9, "mean {m}");
            prop_assert!((s - 1.0).abs() < 1e-9, "std {s}");
        }
        for (r, b) in out.iter().zip(&input) {
            let a = denormalize(r, &stats).unwrap();
            for j in 0..N_FEATURES {
                prop_assert!((a.values[j] - b.values[j]).abs() <= 1e-9 * b.values[j].abs().max(1.0));
            }
        }
    }

    #[test]
    fn window_count_matches_segmentation(secs in 1.0f64..8.0, window_s in 0.05f64..1.0, overlap in 0.0f64..0.9) {
        let fs = 1024.0;
        let n = (secs * fs) as usize;
        let x = TimeSeries::new(vec![0.5; n], fs).unwrap();
        let windows = segment(&x, window_s, overlap).unwrap();
        let (w, hop) = window_geometry(fs, window_s, overlap).unwrap();
        prop_assert_eq!(windows.len(), window_count(n, w, hop));
        prop_assert!(windows.iter().all(|s| s.len() == w));
    }
}

#[test]
fn normalization_never_emits_nan() {
    let rows: Vec<Vec<f64>> = vec![vec![1.0, 2.0], vec![1.0, 3.0], vec![1.0, 4.0]];
    assert_eq!(NormalizationStats::fit(&rows).unwrap_err(), Error::ConstantFeature(0));
}
