use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bands::{FaultBands, DEFAULT_HALF_WIDTH_FRAC, DEFAULT_MAX_HARMONIC};
use super::FaultFrequencies;
use crate::error::{Error, Result};
use crate::signal::{envelope_spectrum, magnitude_spectrum, mean, TimeSeries};

pub const N_FEATURES: usize = 14;

/// Bearing health classes, in label-index order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Condition {
    #[serde(rename = "normal")]
    Normal,
    #[serde(rename = "OR-0.3")]
    OuterMinor,
    #[serde(rename = "OR-1.0")]
    OuterMajor,
    #[serde(rename = "IR-0.3")]
    InnerMinor,
    #[serde(rename = "IR-1.0")]
    InnerMajor,
}

/// Which race carries the defect.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaultSite {
    Outer,
    Inner,
}

impl Condition {
    pub const ALL: [Condition; 5] = [
        Condition::Normal,
        Condition::OuterMinor,
        Condition::OuterMajor,
        Condition::InnerMinor,
        Condition::InnerMajor,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn label(self) -> &'static str {
        match self {
            Condition::Normal => "normal",
            Condition::OuterMinor => "OR-0.3",
            Condition::OuterMajor => "OR-1.0",
            Condition::InnerMinor => "IR-0.3",
            Condition::InnerMajor => "IR-1.0",
        }
    }

    pub fn site(self) -> Option<FaultSite> {
        match self {
            Condition::Normal => None,
            Condition::OuterMinor | Condition::OuterMajor => Some(FaultSite::Outer),
            Condition::InnerMinor | Condition::InnerMajor => Some(FaultSite::Inner),
        }
    }

    /// Crack size in millimetres, 0 for a healthy bearing.
    pub fn crack_mm(self) -> f64 {
        match self {
            Condition::Normal => 0.0,
            Condition::OuterMinor | Condition::InnerMinor => 0.3,
            Condition::OuterMajor | Condition::InnerMajor => 1.0,
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.label() == s)
            .ok_or_else(|| Error::UnknownLabel(s.to_string()))
    }
}

/// The fourteen statistical-spectral features of one analysis window.
///
/// Index `i` holds feature `f{i+1}`: mean, variance, RMS, absolute peak,
/// skewness, kurtosis, crest, shape, impulse and clearance factors, outer-race
/// band peak, inner-race band peak, spectral mean and spectral variance.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: [f64; N_FEATURES],
    pub label: Option<Condition>,
    pub window_index: usize,
}

impl FeatureVector {
    pub fn new(values: [f64; N_FEATURES], label: Option<Condition>, window_index: usize) -> Self {
        Self {
            values,
            label,
            window_index,
        }
    }

    /// Feature by its 1-based number.
    pub fn f(&self, number: usize) -> f64 {
        self.values[number - 1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureOptions {
    pub half_width_frac: f64,
    pub max_harmonic: usize,
    /// Use the envelope spectrum for f11–f14 instead of the plain magnitude spectrum.
    pub envelope: bool,
}

impl Default for FeatureOptions {
    fn default() -> Self {
        Self {
            half_width_frac: DEFAULT_HALF_WIDTH_FRAC,
            max_harmonic: DEFAULT_MAX_HARMONIC,
            envelope: false,
        }
    }
}

/// Computes f1–f14 for a single window.
pub fn extract_features(
    x: &TimeSeries,
    ff: &FaultFrequencies,
    opts: &FeatureOptions,
) -> Result<FeatureVector> {
    let v = x.samples();
    let n = v.len();
    let fs = x.sample_rate_hz();
    let needed = (fs / ff.bpfo_hz).ceil() as usize;
    if n < needed.max(4) {
        return Err(Error::TooShort {
            needed: needed.max(4),
            got: n,
        });
    }
    let nf = n as f64;
    let mu = mean(v);
    let (m2, m3, m4) = v.iter().fold((0.0, 0.0, 0.0), |(a, b, c), &s| {
        let d = s - mu;
        let d2 = d * d;
        (a + d2, b + d2 * d, c + d2 * d2)
    });
    if m2 == 0.0 || v.iter().all(|&s| s == v[0]) {
        return Err(Error::ZeroVariance);
    }
    let variance = m2 / nf;
    let rms = (v.iter().map(|s| s * s).sum::<f64>() / nf).sqrt();
    let peak = v.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    let abs_mean = v.iter().map(|s| s.abs()).sum::<f64>() / nf;
    let sqrt_abs_mean = v.iter().map(|s| s.abs().sqrt()).sum::<f64>() / nf;
    // skewness and kurtosis share the sample standard deviation
    let sample_var = m2 / (nf - 1.0);
    let skewness = m3 / (sample_var.powf(1.5) * (nf - 1.0));
    let kurtosis = m4 / (sample_var * sample_var * (nf - 1.0));

    let spectrum = if opts.envelope {
        envelope_spectrum(x)?
    } else {
        magnitude_spectrum(x)?
    };
    let bands = FaultBands::new(ff, &spectrum, opts.max_harmonic, opts.half_width_frac)?;
    let amps = spectrum.amplitudes();
    let k = amps.len() as f64;
    let spec_mean = amps.iter().sum::<f64>() / k;
    let spec_var = amps.iter().map(|a| (a - spec_mean).powi(2)).sum::<f64>() / k;

    let values = [
        mu,
        variance,
        rms,
        peak,
        skewness,
        kurtosis,
        peak / rms,
        rms / abs_mean,
        peak / abs_mean,
        peak / (sqrt_abs_mean * sqrt_abs_mean),
        bands.outer_peak(&spectrum),
        bands.inner_peak(&spectrum),
        spec_mean,
        spec_var,
    ];
    if values.iter().any(|f| !f.is_finite()) {
        return Err(Error::Numeric("non-finite feature value".into()));
    }
    Ok(FeatureVector::new(values, None, 0))
}

/// Features for a run of windows, in input order, numbered from `first_index`.
pub fn extract_all(
    windows: &[TimeSeries],
    ff: &FaultFrequencies,
    opts: &FeatureOptions,
    label: Option<Condition>,
    first_index: usize,
) -> Result<Vec<FeatureVector>> {
    windows
        .par_iter()
        .enumerate()
        .map(|(i, w)| {
            let mut fv = extract_features(w, ff, opts)?;
            fv.label = label;
            fv.window_index = first_index + i;
            Ok(fv)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{fault_frequencies, BearingGeometry, DEFAULT_SHAFT_HZ};
    use crate::signal::kurtosis;
    use std::f64::consts::PI;

    fn rig() -> FaultFrequencies {
        fault_frequencies(&BearingGeometry::default(), DEFAULT_SHAFT_HZ).unwrap()
    }

    #[test]
    fn full_period_sine() {
        let fs = 51_200.0;
        let a = 1.7;
        let v: Vec<f64> = (0..51_200)
            .map(|i| a * (2.0 * PI * 100.0 * i as f64 / fs).sin())
            .collect();
        let fv = extract_features(&TimeSeries::new(v, fs).unwrap(), &rig(), &Default::default())
            .unwrap();
        assert!((fv.f(3) - a / 2f64.sqrt()).abs() < 1e-9);
        assert!((fv.f(4) - a).abs() < 1e-9);
        assert!((fv.f(7) - 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn single_spike_kurtosis() {
        // low rate so the window resolves the outer-race frequency with 8 samples
        let ff = FaultFrequencies {
            bpfo_hz: 1.0,
            bpfi_hz: 1.5,
            shaft_hz: 0.4,
        };
        let x = TimeSeries::new(vec![0., 0., 0., 0., 0., 0., 0., 1.], 8.0).unwrap();
        let opts = FeatureOptions {
            max_harmonic: 2,
            ..Default::default()
        };
        let fv = extract_features(&x, &ff, &opts).unwrap();
        assert!((fv.f(6) - 5.375).abs() < 1e-12);
        assert_eq!(fv.f(6), kurtosis(&x).unwrap());
    }

    #[test]
    fn definitional_identities() {
        let fs = 51_200.0;
        let v: Vec<f64> = (0..51_200)
            .map(|i| ((i * 7919) % 1013) as f64 / 1013.0 - 0.4)
            .collect();
        let fv = extract_features(&TimeSeries::new(v.clone(), fs).unwrap(), &rig(), &Default::default())
            .unwrap();
        let abs_mean = v.iter().map(|s| s.abs()).sum::<f64>() / v.len() as f64;
        assert!((fv.f(7) * fv.f(3) - fv.f(4)).abs() < 1e-9);
        assert!((fv.f(9) * abs_mean - fv.f(4)).abs() < 1e-9);
        assert!((fv.f(8) * abs_mean - fv.f(3)).abs() < 1e-9);
    }

    #[test]
    fn too_short_and_constant() {
        let x = TimeSeries::new(vec![0.1; 100], 51_200.0).unwrap();
        assert!(matches!(
            extract_features(&x, &rig(), &Default::default()),
            Err(Error::TooShort { .. })
        ));
        let x = TimeSeries::new(vec![0.1; 51_200], 51_200.0).unwrap();
        assert_eq!(
            extract_features(&x, &rig(), &Default::default()).unwrap_err(),
            Error::ZeroVariance
        );
    }

    #[test]
    fn labels_round_trip_as_text() {
        for c in Condition::ALL {
            assert_eq!(c.label().parse::<Condition>().unwrap(), c);
            assert_eq!(Condition::from_index(c.index()), Some(c));
        }
        assert!(matches!("OR-0.5".parse::<Condition>(), Err(Error::UnknownLabel(_))));
    }
}
