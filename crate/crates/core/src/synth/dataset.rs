use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generator::{generate, SynthSpec};
use crate::error::{Error, Result};
use crate::features::{
    fault_frequencies, segment, window_geometry, BearingGeometry, Condition, FeatureVector,
    DEFAULT_OVERLAP_FRAC, DEFAULT_SHAFT_HZ, DEFAULT_WINDOW_S,
};
use crate::pipeline::{process_window, ProcessingConfig, WindowRecord};
use crate::signal::DEFAULT_SAMPLE_RATE_HZ;

/// Layout and physics of a synthetic train/test benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DatasetSpec {
    pub n_train: usize,
    pub n_test: usize,
    pub snr_db: f64,
    pub seed: u64,
    /// Windows cut from each synthetic recording.
    pub windows_per_recording: usize,
    pub window_s: f64,
    pub overlap_frac: f64,
    pub sample_rate_hz: f64,
    pub shaft_hz: f64,
    pub geometry: BearingGeometry,
    pub resonance_hz: f64,
    pub damping: f64,
    pub jitter_frac: f64,
    pub tone_amplitude: f64,
    /// Each recording's SNR is drawn uniformly within ± this many dB of `snr_db`.
    pub snr_spread_db: f64,
    /// Each recording gets a uniform random gain within ± this many dB.
    pub gain_spread_db: f64,
}

impl Default for DatasetSpec {
    fn default() -> Self {
        let t = SynthSpec::new(Condition::Normal, -5.0, 0);
        Self {
            n_train: 3840,
            n_test: 960,
            snr_db: -5.0,
            seed: 0,
            windows_per_recording: 16,
            window_s: DEFAULT_WINDOW_S,
            overlap_frac: DEFAULT_OVERLAP_FRAC,
            sample_rate_hz: DEFAULT_SAMPLE_RATE_HZ,
            shaft_hz: DEFAULT_SHAFT_HZ,
            geometry: BearingGeometry::default(),
            resonance_hz: t.resonance_hz,
            damping: t.damping,
            jitter_frac: t.jitter_frac,
            tone_amplitude: t.tone_amplitude,
            snr_spread_db: 0.0,
            gain_spread_db: 0.0,
        }
    }
}

/// Which side of the split a recording belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

/// A recording to synthesize: class, split, ordinal and the number of windows kept.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecordingPlan {
    pub id: usize,
    pub split: Split,
    pub condition: Condition,
    pub windows: usize,
    pub spec: SynthSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthDataset {
    pub train: Vec<WindowRecord>,
    pub test: Vec<WindowRecord>,
}

impl SynthDataset {
    pub fn feature_rows(&self, split: Split, denoised: bool) -> Vec<FeatureVector> {
        let rows = match split {
            Split::Train => &self.train,
            Split::Test => &self.test,
        };
        rows.iter().map(|r| r.feature_vector(denoised)).collect()
    }
}

/// SplitMix64 finalizer, used to derive independent per-recording seeds.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl DatasetSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, n) in [("n_train", self.n_train), ("n_test", self.n_test)] {
            if n == 0 || n % Condition::ALL.len() != 0 {
                return Err(Error::BadCounts(format!(
                    "{name} = {n} must be a positive multiple of {}",
                    Condition::ALL.len()
                )));
            }
        }
        if self.windows_per_recording == 0 {
            return Err(Error::BadCounts("windows_per_recording must be positive".into()));
        }
        if !(self.snr_spread_db >= 0.0 && self.gain_spread_db >= 0.0) {
            return Err(Error::BadSpec("spreads must be non-negative".into()));
        }
        window_geometry(self.sample_rate_hz, self.window_s, self.overlap_frac)?;
        Ok(())
    }

    /// Recording length that yields exactly `windows_per_recording` windows.
    pub fn recording_duration_s(&self) -> Result<f64> {
        let (w, hop) = window_geometry(self.sample_rate_hz, self.window_s, self.overlap_frac)?;
        let n = w + (self.windows_per_recording - 1) * hop;
        Ok((n as f64 / self.sample_rate_hz).max(1.0))
    }

    /// Every recording of the benchmark, train recordings first, classes in label order.
    pub fn plan(&self) -> Result<Vec<RecordingPlan>> {
        self.validate()?;
        let duration_s = self.recording_duration_s()?;
        let k = Condition::ALL.len();
        let mut plans = Vec::new();
        for (split, total) in [(Split::Train, self.n_train), (Split::Test, self.n_test)] {
            let per_class = total / k;
            let recordings = per_class.div_ceil(self.windows_per_recording);
            for condition in Condition::ALL {
                for r in 0..recordings {
                    let id = plans.len();
                    let seed = mix(mix(self.seed) ^ id as u64);
                    let mut nuisance = ChaCha8Rng::seed_from_u64(mix(seed));
                    let snr_jitter = if self.snr_spread_db > 0.0 {
                        nuisance.gen_range(-self.snr_spread_db..=self.snr_spread_db)
                    } else {
                        0.0
                    };
                    let gain_db = if self.gain_spread_db > 0.0 {
                        nuisance.gen_range(-self.gain_spread_db..=self.gain_spread_db)
                    } else {
                        0.0
                    };
                    let spec = SynthSpec {
                        snr_db: self.snr_db + snr_jitter,
                        duration_s,
                        sample_rate_hz: self.sample_rate_hz,
                        resonance_hz: self.resonance_hz,
                        damping: self.damping,
                        jitter_frac: self.jitter_frac,
                        tone_amplitude: self.tone_amplitude,
                        gain_db,
                        ..SynthSpec::new(condition, self.snr_db, seed)
                    };
                    let windows = self.windows_per_recording.min(per_class - r * self.windows_per_recording);
                    plans.push(RecordingPlan {
                        id,
                        split,
                        condition,
                        windows,
                        spec,
                    });
                }
            }
        }
        Ok(plans)
    }
}

/// Synthesizes every recording, cuts windows, and processes each window with
/// and without denoising. Train and test windows come from disjoint recordings.
pub fn build_dataset(spec: &DatasetSpec, processing: &ProcessingConfig) -> Result<SynthDataset> {
    processing.validate()?;
    let plans = spec.plan()?;
    let bank = processing.bank()?;
    let ff = fault_frequencies(&spec.geometry, spec.shaft_hz)?;
    let per_recording: Vec<Vec<WindowRecord>> = plans
        .par_iter()
        .map(|p| {
            let x = generate(&p.spec, &spec.geometry, spec.shaft_hz)?;
            let windows = segment(&x, spec.window_s, spec.overlap_frac)?;
            windows
                .iter()
                .take(p.windows)
                .enumerate()
                .map(|(k, w)| {
                    let mut rec = process_window(w, &bank, processing, &ff)?;
                    rec.label = Some(p.condition);
                    rec.recording = p.id;
                    rec.window_index = p.id * spec.windows_per_recording + k;
                    Ok(rec)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut train = Vec::with_capacity(spec.n_train);
    let mut test = Vec::with_capacity(spec.n_test);
    for (p, recs) in plans.iter().zip(per_recording) {
        match p.split {
            Split::Train => train.extend(recs),
            Split::Test => test.extend(recs),
        }
    }
    Ok(SynthDataset { train, test })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn default_plan_counts() {
        let spec = DatasetSpec::default();
        let plans = spec.plan().unwrap();
        for c in Condition::ALL {
            let train: usize = plans
                .iter()
                .filter(|p| p.condition == c && p.split == Split::Train)
                .map(|p| p.windows)
                .sum();
            let test: usize = plans
                .iter()
                .filter(|p| p.condition == c && p.split == Split::Test)
                .map(|p| p.windows)
                .sum();
            assert_eq!((train, test), (768, 192));
        }
        assert!((spec.recording_duration_s().unwrap() - 14.5).abs() < 1e-12);
        let seeds: HashSet<u64> = plans.iter().map(|p| p.spec.seed).collect();
        assert_eq!(seeds.len(), plans.len());
    }

    #[test]
    fn bad_counts() {
        for (n_train, n_test) in [(3841, 960), (3840, 0)] {
            let spec = DatasetSpec {
                n_train,
                n_test,
                ..Default::default()
            };
            assert!(matches!(spec.plan(), Err(Error::BadCounts(_))));
        }
    }

    #[test]
    fn small_build_is_disjoint_and_labeled() {
        let spec = DatasetSpec {
            n_train: 20,
            n_test: 10,
            windows_per_recording: 3,
            snr_db: 0.0,
            seed: 4,
            ..Default::default()
        };
        let processing = ProcessingConfig {
            wavelet_bank: "db2,bior3.1".into(),
            ..Default::default()
        };
        let d = build_dataset(&spec, &processing).unwrap();
        assert_eq!((d.train.len(), d.test.len()), (20, 10));
        let train_idx: HashSet<usize> = d.train.iter().map(|r| r.window_index).collect();
        let train_rec: HashSet<usize> = d.train.iter().map(|r| r.recording).collect();
        assert!(d.test.iter().all(|r| !train_idx.contains(&r.window_index)));
        assert!(d.test.iter().all(|r| !train_rec.contains(&r.recording)));
        for c in Condition::ALL {
            assert_eq!(d.train.iter().filter(|r| r.label == Some(c)).count(), 4);
            assert_eq!(d.test.iter().filter(|r| r.label == Some(c)).count(), 2);
        }
        assert_eq!(build_dataset(&spec, &processing).unwrap(), d);
    }
}
