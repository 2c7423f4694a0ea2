use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{fault_frequencies, BearingGeometry, Condition, FaultSite};
use crate::signal::{TimeSeries, DEFAULT_SAMPLE_RATE_HZ};

/// Relative amplitudes of the shaft tone and its first three harmonics.
const SHAFT_HARMONICS: [f64; 4] = [1.0, 0.5, 0.3, 0.2];
/// Ring-down is truncated once the decay envelope falls below e^-14.
const RINGDOWN_TIME_CONSTANTS: f64 = 14.0;

/// Parameters of one synthetic recording.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub condition: Condition,
    /// Impulse amplitude scale in (0, 1]; defaults to the crack size in mm.
    pub severity: f64,
    /// Noise power relative to the noiseless component, in dB.
    pub snr_db: f64,
    pub duration_s: f64,
    pub sample_rate_hz: f64,
    pub resonance_hz: f64,
    /// Decay rate of the excited resonance, 1/s.
    pub damping: f64,
    /// Uniform relative jitter on every impulse period.
    pub jitter_frac: f64,
    /// Amplitude of the fundamental shaft tone.
    pub tone_amplitude: f64,
    /// Overall gain applied to the finished recording, in dB.
    pub gain_db: f64,
    pub seed: u64,
}

impl SynthSpec {
    pub fn new(condition: Condition, snr_db: f64, seed: u64) -> Self {
        Self {
            condition,
            severity: if condition == Condition::Normal {
                1.0
            } else {
                condition.crack_mm()
            },
            snr_db,
            duration_s: 1.0,
            sample_rate_hz: DEFAULT_SAMPLE_RATE_HZ,
            resonance_hz: 4000.0,
            damping: 3000.0,
            jitter_frac: 0.01,
            tone_amplitude: 0.05,
            gain_db: 0.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::BadSpec(m));
        if !(self.severity > 0.0 && self.severity <= 1.0) {
            return bad(format!("severity {} outside (0, 1]", self.severity));
        }
        if !self.snr_db.is_finite() || !self.gain_db.is_finite() {
            return bad("SNR and gain must be finite".into());
        }
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz > 0.0) {
            return bad(format!("sample rate {}", self.sample_rate_hz));
        }
        if !(self.duration_s.is_finite() && self.duration_s >= 1.0) {
            return bad(format!("duration {} s is below 1 s", self.duration_s));
        }
        if !(self.resonance_hz > 0.0 && self.resonance_hz < self.sample_rate_hz / 2.0) {
            return bad(format!("resonance {} Hz outside (0, Nyquist)", self.resonance_hz));
        }
        if !(self.damping.is_finite() && self.damping > 0.0) {
            return bad(format!("damping {}", self.damping));
        }
        if !(0.0..=0.05).contains(&self.jitter_frac) {
            return bad(format!("jitter {} outside [0, 0.05]", self.jitter_frac));
        }
        if !(self.tone_amplitude.is_finite() && self.tone_amplitude >= 0.0) {
            return bad(format!("tone amplitude {}", self.tone_amplitude));
        }
        Ok(())
    }
}

/// A recording split into its noiseless part and the additive noise.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthParts {
    pub clean: Vec<f64>,
    pub noise: Vec<f64>,
    pub sample_rate_hz: f64,
}

impl SynthParts {
    pub fn mixed(&self) -> Result<TimeSeries> {
        let v = self.clean.iter().zip(&self.noise).map(|(c, n)| c + n).collect();
        TimeSeries::new(v, self.sample_rate_hz)
    }
}

fn rms(v: &[f64]) -> f64 {
    (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt()
}

/// Generates the noiseless and noise components separately.
pub fn generate_parts(spec: &SynthSpec, g: &BearingGeometry, shaft_hz: f64) -> Result<SynthParts> {
    spec.validate()?;
    let ff = fault_frequencies(g, shaft_hz).map_err(|e| Error::BadSpec(e.to_string()))?;
    let fs = spec.sample_rate_hz;
    let n = (spec.duration_s * fs).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut clean = vec![0.0; n];
    for (h, rel) in SHAFT_HARMONICS.iter().enumerate() {
        let amp = spec.tone_amplitude * rel;
        let w = 2.0 * PI * shaft_hz * (h + 1) as f64 / fs;
        let phase: f64 = rng.gen_range(0.0..2.0 * PI);
        for (i, c) in clean.iter_mut().enumerate() {
            *c += amp * (w * i as f64 + phase).sin();
        }
    }

    if let Some(site) = spec.condition.site() {
        let rate = match site {
            FaultSite::Outer => ff.bpfo_hz,
            FaultSite::Inner => ff.bpfi_hz,
        };
        let len = ((RINGDOWN_TIME_CONSTANTS / spec.damping) * fs).ceil() as usize;
        let kernel: Vec<f64> = (0..len.max(1))
            .map(|i| {
                let t = i as f64 / fs;
                (-spec.damping * t).exp() * (2.0 * PI * spec.resonance_hz * t).sin()
            })
            .collect();
        let period = 1.0 / rate;
        let mut t = rng.gen_range(0.0..period);
        while t < spec.duration_s {
            let start = (t * fs).round() as usize;
            if start >= n {
                break;
            }
            let mut amp = spec.severity;
            if site == FaultSite::Inner {
                amp *= 1.0 + 0.5 * (2.0 * PI * shaft_hz * t).cos();
            }
            for (c, k) in clean[start..].iter_mut().zip(&kernel) {
                *c += amp * k;
            }
            t += period * (1.0 + spec.jitter_frac * rng.gen_range(-1.0..=1.0));
        }
    }

    let sigma = rms(&clean) * 10f64.powf(-spec.snr_db / 20.0);
    let mut noise: Vec<f64> = (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            sigma * z
        })
        .collect();
    let gain = 10f64.powf(spec.gain_db / 20.0);
    if gain != 1.0 {
        clean.iter_mut().chain(noise.iter_mut()).for_each(|v| *v *= gain);
    }
    Ok(SynthParts {
        clean,
        noise,
        sample_rate_hz: fs,
    })
}

/// Synthetic bearing recording: shaft tones, fault impulses exciting a damped
/// resonance, and white noise at the requested SNR.
pub fn generate(spec: &SynthSpec, g: &BearingGeometry, shaft_hz: f64) -> Result<TimeSeries> {
    generate_parts(spec, g, shaft_hz)?.mixed()
}
