use super::{magnitude_spectrum, Spectrum, TimeSeries};
use crate::error::{Error, Result};

/// Floor applied to |E_f| before dividing, so a pure tone gives a large but
/// finite KE.
pub const KE_ENTROPY_FLOOR: f64 = 1e-12;

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Σ(x−μ)⁴ / (σ⁴·(N−1)) with σ the sample standard deviation (divisor N−1).
pub fn kurtosis(x: &TimeSeries) -> Result<f64> {
    kurtosis_of(x.samples())
}

pub(crate) fn kurtosis_of(x: &[f64]) -> Result<f64> {
    let n = x.len();
    if n < 4 {
        return Err(Error::TooShort { needed: 4, got: n });
    }
    let mu = mean(x);
    let (m2, m4) = x.iter().fold((0.0, 0.0), |(s2, s4), v| {
        let d = v - mu;
        let d2 = d * d;
        (s2 + d2, s4 + d2 * d2)
    });
    if m2 == 0.0 || x.iter().all(|&v| v == x[0]) {
        return Err(Error::ZeroVariance);
    }
    let var = m2 / (n - 1) as f64;
    let k = m4 / (var * var * (n - 1) as f64);
    if !k.is_finite() {
        return Err(Error::ZeroVariance);
    }
    Ok(k)
}

/// |Σ p_k ln p_k| with p_k the normalized spectral power s_k² / Σ s_j².
///
/// Bins with zero power contribute nothing.
pub fn spectral_entropy(s: &Spectrum) -> Result<f64> {
    entropy_of(s.amplitudes())
}

pub(crate) fn entropy_of(amplitudes: &[f64]) -> Result<f64> {
    // rescale by the peak so squaring tiny or huge amplitudes stays in range
    let peak = amplitudes.iter().cloned().fold(0.0, f64::max);
    if peak == 0.0 {
        return Err(Error::EmptySpectrum);
    }
    let total: f64 = amplitudes.iter().map(|a| (a / peak).powi(2)).sum();
    let h = amplitudes
        .iter()
        .map(|a| (a / peak).powi(2) / total)
        .filter(|&p| p > 0.0)
        .map(|p| p * p.ln())
        .sum::<f64>();
    Ok(h.abs())
}

/// Kurtosis divided by the (floored) spectral entropy of the same signal.
pub fn ke_index(x: &TimeSeries) -> Result<f64> {
    let k = kurtosis(x)?;
    let e = spectral_entropy(&magnitude_spectrum(x)?)?;
    Ok(k.abs() / e.max(KE_ENTROPY_FLOOR))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn ts(v: Vec<f64>) -> TimeSeries {
        TimeSeries::new(v, 1000.0).unwrap()
    }

    fn gaussian(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    /// Exact rational evaluation of Σ(x−μ)⁴/(s⁴(N−1)) for integer samples.
    /// Returns (numerator, denominator).
    fn exact_kurtosis(x: &[i64]) -> (i128, i128) {
        let n = x.len() as i128;
        let sum: i128 = x.iter().map(|&v| v as i128).sum();
        // work with d_i = N·x_i − Σx so everything stays integral
        let d: Vec<i128> = x.iter().map(|&v| n * v as i128 - sum).collect();
        let m2: i128 = d.iter().map(|v| v * v).sum(); // = N²·Σ(x−μ)²
        let m4: i128 = d.iter().map(|v| v * v * v * v).sum(); // = N⁴·Σ(x−μ)⁴
        // K = (m4/N⁴) / ((m2/N²/(N−1))² (N−1)) = m4 (N−1) / m2²
        (m4 * (n - 1), m2 * m2)
    }

    #[test]
    fn kurtosis_of_single_spike() {
        let (num, den) = exact_kurtosis(&[0, 0, 0, 0, 0, 0, 0, 1]);
        assert_eq!(num * 8, den * 43); // 43/8 = 5.375
        let k = kurtosis(&ts(vec![0., 0., 0., 0., 0., 0., 0., 1.])).unwrap();
        assert!((k - 5.375).abs() < 1e-12);
    }

    #[test]
    fn kurtosis_matches_exact_rational() {
        let samples = [3i64, -1, 4, 1, -5, 9, 2, -6, 5, 3];
        let (num, den) = exact_kurtosis(&samples);
        let k = kurtosis(&ts(samples.iter().map(|&v| v as f64).collect())).unwrap();
        assert!((k - num as f64 / den as f64).abs() < 1e-12);
    }

    #[test]
    fn kurtosis_errors() {
        assert_eq!(kurtosis(&ts(vec![2.0; 16])), Err(Error::ZeroVariance));
        assert_eq!(
            kurtosis(&ts(vec![1.0, 2.0, 3.0])),
            Err(Error::TooShort { needed: 4, got: 3 })
        );
    }

    #[test]
    fn gaussian_kurtosis_near_three() {
        let k = kurtosis(&ts(gaussian(100_000, 42))).unwrap();
        assert!((k - 3.0).abs() < 0.15, "{k}");
    }

    #[test]
    fn entropy_bounds() {
        let k = 257;
        let uniform = Spectrum::new(vec![0.3; k], 1.0, 512).unwrap();
        assert!((spectral_entropy(&uniform).unwrap() - (k as f64).ln()).abs() < 1e-12);
        let mut single = vec![0.0; k];
        single[17] = 4.0;
        let single = Spectrum::new(single, 1.0, 512).unwrap();
        assert_eq!(spectral_entropy(&single).unwrap(), 0.0);
        let empty = Spectrum::new(vec![0.0; k], 1.0, 512).unwrap();
        assert_eq!(spectral_entropy(&empty), Err(Error::EmptySpectrum));
    }

    #[test]
    fn noise_has_more_entropy_than_a_tone() {
        let n = 4096;
        let noise = ts(gaussian(n, 3));
        let tone = ts((0..n)
            .map(|i| (2.0 * std::f64::consts::PI * 100.0 * i as f64 / 1000.0).sin())
            .collect());
        let e_noise = spectral_entropy(&magnitude_spectrum(&noise).unwrap()).unwrap();
        let e_tone = spectral_entropy(&magnitude_spectrum(&tone).unwrap()).unwrap();
        // direct Σ p ln p on the noise spectrum
        let a = magnitude_spectrum(&noise).unwrap().amplitudes().to_vec();
        let tot: f64 = a.iter().map(|v| v * v).sum();
        let direct: f64 = -a
            .iter()
            .map(|v| v * v / tot)
            .filter(|p| *p > 0.0)
            .map(|p| p * p.ln())
            .sum::<f64>();
        assert!((e_noise - direct).abs() < 1e-9);
        assert!(e_noise > e_tone);
    }

    #[test]
    fn ke_is_kurtosis_over_entropy() {
        let x = ts(gaussian(1000, 9));
        let k = kurtosis(&x).unwrap();
        let e = spectral_entropy(&magnitude_spectrum(&x).unwrap()).unwrap();
        let ke = ke_index(&x).unwrap();
        assert!(((ke - k / e) / ke).abs() < 1e-12);
        assert!(ke > 0.0);
    }

    #[test]
    fn ke_scale_invariant() {
        let x = ts(gaussian(2048, 11));
        let base = ke_index(&x).unwrap();
        for a in [7.3, -1.0] {
            let v = ke_index(&x.scaled(a).unwrap()).unwrap();
            assert!(((v - base) / base).abs() < 1e-9);
        }
    }

    #[test]
    fn ke_prefers_impulsive_signals() {
        let n = 8192;
        let noise = gaussian(n, 5);
        let impulsive: Vec<f64> = gaussian(n, 6)
            .iter()
            .enumerate()
            .map(|(i, v)| 0.05 * v + if i % 256 == 0 { 5.0 } else { 0.0 })
            .collect();
        assert!(ke_index(&ts(impulsive)).unwrap() > ke_index(&ts(noise)).unwrap());
    }

    #[test]
    fn pure_tone_ke_is_finite() {
        let x: Vec<f64> = (0..1024)
            .map(|i| (2.0 * std::f64::consts::PI * 64.0 * i as f64 / 1024.0).cos())
            .collect();
        let ke = ke_index(&ts(x)).unwrap();
        assert!(ke.is_finite() && ke > 1.0);
    }
}
