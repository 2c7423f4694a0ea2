use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{dwt, idwt, FilterBank, WaveletDecomposition};
use crate::error::{Error, Result};
use crate::signal::{ke_index, TimeSeries};

/// Decomposition depth used at 51.2 kHz unless configured otherwise.
pub const DEFAULT_LEVEL: usize = 5;

/// Median absolute deviation of Gaussian noise relative to its standard deviation.
const MAD_TO_SIGMA: f64 = 0.6745;

/// Which sequence the KE index is evaluated on when ranking wavelets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KeSource {
    /// Detail coefficients before shrinkage, concatenated finest to coarsest.
    #[default]
    Details,
    /// Detail coefficients after soft thresholding.
    ThresholdedDetails,
    /// The reconstructed, denoised signal.
    Reconstruction,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DenoiseOptions {
    pub level: usize,
    pub ke_source: KeSource,
}

impl Default for DenoiseOptions {
    fn default() -> Self {
        Self {
            level: DEFAULT_LEVEL,
            ke_source: KeSource::Details,
        }
    }
}

/// Output of a single-wavelet denoising pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Denoised {
    pub signal: TimeSeries,
    pub ke: f64,
    /// The KE input had zero variance or no spectral energy; `ke` is 0.
    pub ke_degenerate: bool,
    pub thresholds: Vec<f64>,
    /// KE of each detail level on its own (0 where degenerate), finest first.
    pub level_ke: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeEntry {
    pub wavelet: String,
    pub ke: f64,
    pub degenerate: bool,
}

/// Result of the KE-maximizing sweep over a candidate bank.
#[derive(Debug, Clone, PartialEq)]
pub struct DenoiseReport {
    pub chosen_wavelet: String,
    /// One entry per candidate, in bank order.
    pub ke_table: Vec<KeEntry>,
    pub threshold_per_level: Vec<f64>,
    pub level_ke: Vec<f64>,
    pub denoised: TimeSeries,
}

impl DenoiseReport {
    pub fn chosen_ke(&self) -> f64 {
        self.ke_table
            .iter()
            .find(|e| e.wavelet == self.chosen_wavelet)
            .map(|e| e.ke)
            .unwrap_or(0.0)
    }

    /// `wavelet,ke` table with a header row.
    pub fn ke_table_csv(&self) -> String {
        let mut out = String::from("wavelet,ke\n");
        for e in &self.ke_table {
            out.push_str(&format!("{},{}\n", e.wavelet, e.ke));
        }
        out
    }
}

/// Soft shrinkage `sign(c)·max(|c| − t, 0)`.
#[inline]
pub fn shrink(c: f64, t: f64) -> f64 {
    let m = c.abs() - t;
    if m > 0.0 {
        m.copysign(c)
    } else {
        0.0
    }
}

/// `σ̂·√(2 ln N)` with `σ̂ = median(|d|) / 0.6745`.
pub fn universal_threshold(detail: &[f64]) -> f64 {
    if detail.is_empty() {
        return 0.0;
    }
    let mut mags: Vec<f64> = detail.iter().map(|c| c.abs()).collect();
    mags.sort_by(f64::total_cmp);
    let n = mags.len();
    let median = if n % 2 == 1 {
        mags[n / 2]
    } else {
        0.5 * (mags[n / 2 - 1] + mags[n / 2])
    };
    let sigma = median / MAD_TO_SIGMA;
    sigma * (2.0 * (n as f64).ln()).max(0.0).sqrt()
}

/// Per-level universal soft thresholding; the approximation is left untouched.
///
/// Returns the shrunk decomposition and the threshold used for each level.
pub fn soft_threshold(d: &WaveletDecomposition) -> (WaveletDecomposition, Vec<f64>) {
    let thresholds: Vec<f64> = d.details.iter().map(|det| universal_threshold(det)).collect();
    let details = d
        .details
        .iter()
        .zip(&thresholds)
        .map(|(det, &t)| det.iter().map(|&c| shrink(c, t)).collect())
        .collect();
    (
        WaveletDecomposition {
            details,
            ..d.clone()
        },
        thresholds,
    )
}

/// KE of a coefficient sequence; degenerate inputs give `(0, true)`.
fn ke_or_degenerate(values: Vec<f64>, sample_rate_hz: f64) -> Result<(f64, bool)> {
    let x = TimeSeries::new(values, sample_rate_hz)?;
    match ke_index(&x) {
        Ok(k) => Ok((k, false)),
        Err(Error::ZeroVariance) | Err(Error::EmptySpectrum) => Ok((0.0, true)),
        Err(e) => Err(e),
    }
}

fn per_level_ke(d: &WaveletDecomposition) -> Vec<f64> {
    d.details
        .iter()
        .map(|det| {
            ke_or_degenerate(det.clone(), d.sample_rate_hz)
                .map(|(k, _)| k)
                .unwrap_or(0.0)
        })
        .collect()
}

struct Candidate {
    decomposition: WaveletDecomposition,
    shrunk: Option<(WaveletDecomposition, Vec<f64>)>,
    reconstruction: Option<TimeSeries>,
    ke: f64,
    degenerate: bool,
}

fn evaluate(x: &TimeSeries, fb: &FilterBank, opts: &DenoiseOptions) -> Result<Candidate> {
    let decomposition = dwt(x, fb, opts.level)?;
    let fs = x.sample_rate_hz();
    let (shrunk, reconstruction, (ke, degenerate)) = match opts.ke_source {
        KeSource::Details => {
            let ke = ke_or_degenerate(decomposition.concatenated_details(), fs)?;
            (None, None, ke)
        }
        KeSource::ThresholdedDetails => {
            let (s, t) = soft_threshold(&decomposition);
            let ke = ke_or_degenerate(s.concatenated_details(), fs)?;
            (Some((s, t)), None, ke)
        }
        KeSource::Reconstruction => {
            let (s, t) = soft_threshold(&decomposition);
            let y = idwt(&s, fb)?;
            let ke = ke_or_degenerate(y.samples().to_vec(), fs)?;
            (Some((s, t)), Some(y), ke)
        }
    };
    Ok(Candidate {
        decomposition,
        shrunk,
        reconstruction,
        ke,
        degenerate,
    })
}

fn finish(candidate: Candidate, fb: &FilterBank) -> Result<Denoised> {
    let (shrunk, thresholds) = match candidate.shrunk {
        Some(s) => s,
        None => soft_threshold(&candidate.decomposition),
    };
    let signal = match candidate.reconstruction {
        Some(y) => y,
        None => idwt(&shrunk, fb)?,
    };
    Ok(Denoised {
        signal,
        ke: candidate.ke,
        ke_degenerate: candidate.degenerate,
        thresholds,
        level_ke: per_level_ke(&candidate.decomposition),
    })
}

/// DWT → soft threshold → inverse DWT, plus the KE score of the pass.
pub fn denoise(x: &TimeSeries, fb: &FilterBank, opts: &DenoiseOptions) -> Result<Denoised> {
    let c = evaluate(x, fb, opts)?;
    finish(c, fb)
}

/// Denoise under every candidate and keep the one with the largest KE.
///
/// Ties go to the earliest candidate in `bank`. Candidates are scored in
/// parallel; the outcome does not depend on the thread count.
pub fn select_wavelet(
    x: &TimeSeries,
    bank: &[FilterBank],
    opts: &DenoiseOptions,
) -> Result<DenoiseReport> {
    if bank.is_empty() {
        return Err(Error::EmptyBank);
    }
    let scored: Vec<(f64, bool)> = bank
        .par_iter()
        .map(|fb| evaluate(x, fb, opts).map(|c| (c.ke, c.degenerate)))
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (i, (ke, _)) in scored.iter().enumerate() {
        if *ke > scored[best].0 {
            best = i;
        }
    }
    let winner = &bank[best];
    let d = denoise(x, winner, opts)?;
    Ok(DenoiseReport {
        chosen_wavelet: winner.name.clone(),
        ke_table: bank
            .iter()
            .zip(&scored)
            .map(|(fb, &(ke, degenerate))| KeEntry {
                wavelet: fb.name.clone(),
                ke,
                degenerate,
            })
            .collect(),
        threshold_per_level: d.thresholds,
        level_ke: d.level_ke,
        denoised: d.signal,
    })
}
