use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{extract_features, Condition, FaultFrequencies, FeatureOptions, FeatureVector, N_FEATURES};
use crate::signal::TimeSeries;
use crate::wavelet::{select_wavelet, DenoiseOptions, FilterBank, KeSource, Registry, DEFAULT_LEVEL};

/// Per-window processing knobs shared by the dataset builder and the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProcessingConfig {
    pub dwt_level: usize,
    /// Comma-separated glob patterns over registry names.
    pub wavelet_bank: String,
    pub ke_source: KeSource,
    pub half_width_frac: f64,
    pub envelope: bool,
    /// Length raw windows are decimated to for the raw-input network.
    pub raw_len: usize,
    pub raw_decimation: RawDecimation,
}

/// How a window is shortened to `raw_len` samples for the raw-input network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RawDecimation {
    /// Mean of each block; a boxcar lowpass that removes the resonance band.
    BlockMean,
    /// Every k-th sample with no anti-alias filter, so high-band content folds down.
    #[default]
    Stride,
}

impl RawDecimation {
    pub fn apply(self, x: &[f64], len: usize) -> Vec<f64> {
        match self {
            RawDecimation::BlockMean => downsample(x, len),
            RawDecimation::Stride => subsample(x, len),
        }
    }
}

impl Default for ProcessingConfig {
    fn default() -> Self {
        let f = FeatureOptions::default();
        Self {
            dwt_level: DEFAULT_LEVEL,
            wavelet_bank: "*".into(),
            ke_source: KeSource::Details,
            half_width_frac: f.half_width_frac,
            envelope: f.envelope,
            raw_len: 512,
            raw_decimation: RawDecimation::default(),
        }
    }
}

impl ProcessingConfig {
    pub fn denoise_options(&self) -> DenoiseOptions {
        DenoiseOptions {
            level: self.dwt_level,
            ke_source: self.ke_source,
        }
    }

    pub fn feature_options(&self) -> FeatureOptions {
        FeatureOptions {
            half_width_frac: self.half_width_frac,
            envelope: self.envelope,
            ..FeatureOptions::default()
        }
    }

    pub fn bank(&self) -> Result<Vec<FilterBank>> {
        Registry::builtin().select(&self.wavelet_bank)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dwt_level == 0 {
            return Err(Error::BadSpec("dwt_level must be at least 1".into()));
        }
        if self.raw_len == 0 {
            return Err(Error::BadSpec("raw_len must be positive".into()));
        }
        if !(0.0..0.5).contains(&self.half_width_frac) {
            return Err(Error::BadSpec(format!("half_width_frac {}", self.half_width_frac)));
        }
        self.bank().map(|_| ())
    }
}

/// Everything the ablation needs from one analysis window, with and without denoising.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowRecord {
    pub label: Option<Condition>,
    pub recording: usize,
    pub window_index: usize,
    pub wavelet: String,
    pub ke: f64,
    pub raw_features: [f64; N_FEATURES],
    pub denoised_features: [f64; N_FEATURES],
    pub raw_input: Vec<f64>,
    pub denoised_input: Vec<f64>,
}

impl WindowRecord {
    pub fn feature_vector(&self, denoised: bool) -> FeatureVector {
        let values = if denoised {
            self.denoised_features
        } else {
            self.raw_features
        };
        FeatureVector::new(values, self.label, self.window_index)
    }

    pub fn network_input(&self, features: bool, denoised: bool) -> &[f64] {
        match (features, denoised) {
            (true, false) => &self.raw_features,
            (true, true) => &self.denoised_features,
            (false, false) => &self.raw_input,
            (false, true) => &self.denoised_input,
        }
    }
}

/// Block means over `len` near-equal segments (boxcar decimation).
pub fn downsample(x: &[f64], len: usize) -> Vec<f64> {
    let n = x.len();
    (0..len)
        .map(|i| {
            let a = i * n / len;
            let b = ((i + 1) * n / len).max(a + 1).min(n);
            x[a..b].iter().sum::<f64>() / (b - a) as f64
        })
        .collect()
}

/// Samples at `floor(i * n / len)`.
pub fn subsample(x: &[f64], len: usize) -> Vec<f64> {
    let n = x.len();
    (0..len).map(|i| x[(i * n / len).min(n - 1)]).collect()
}

/// Features and decimated waveform of a window, before and after KE-guided denoising.
pub fn process_window(
    x: &TimeSeries,
    bank: &[FilterBank],
    cfg: &ProcessingConfig,
    ff: &FaultFrequencies,
) -> Result<WindowRecord> {
    let fopts = cfg.feature_options();
    let report = select_wavelet(x, bank, &cfg.denoise_options())?;
    let raw = extract_features(x, ff, &fopts)?;
    let den = extract_features(&report.denoised, ff, &fopts)?;
    Ok(WindowRecord {
        label: None,
        recording: 0,
        window_index: 0,
        ke: report.chosen_ke(),
        wavelet: report.chosen_wavelet,
        raw_features: raw.values,
        denoised_features: den.values,
        raw_input: cfg.raw_decimation.apply(x.samples(), cfg.raw_len),
        denoised_input: cfg.raw_decimation.apply(report.denoised.samples(), cfg.raw_len),
    })
}
