use std::ops::RangeInclusive;

use super::FaultFrequencies;
use crate::error::{Error, Result};
use crate::signal::Spectrum;

pub const DEFAULT_MAX_HARMONIC: usize = 5;
pub const DEFAULT_HALF_WIDTH_FRAC: f64 = 0.02;
/// Minimum band half-width, in spectrum bins.
pub const MIN_HALF_WIDTH_BINS: f64 = 2.0;

fn harmonic_bins(
    center_hz: f64,
    k: usize,
    half_width_frac: f64,
    bin_width_hz: f64,
) -> (usize, usize) {
    let c = k as f64 * center_hz;
    let hw = (c * half_width_frac).max(MIN_HALF_WIDTH_BINS * bin_width_hz);
    let lo = ((c - hw) / bin_width_hz).ceil().max(0.0) as usize;
    let hi = ((c + hw) / bin_width_hz).floor() as usize;
    (lo, hi)
}

fn check_range(
    s: &Spectrum,
    center_hz: f64,
    max_harmonic: usize,
    half_width_frac: f64,
) -> Result<()> {
    if !(center_hz.is_finite() && center_hz > 0.0) || max_harmonic == 0 {
        return Err(Error::BandOutOfRange(format!(
            "center {center_hz} Hz with {max_harmonic} harmonics"
        )));
    }
    if !(0.0..0.5).contains(&half_width_frac) {
        return Err(Error::BandOutOfRange(format!(
            "half width fraction {half_width_frac}"
        )));
    }
    let top = max_harmonic as f64 * center_hz;
    if top >= s.nyquist_hz() {
        return Err(Error::BandOutOfRange(format!(
            "harmonic {max_harmonic} of {center_hz} Hz is at or above Nyquist {} Hz",
            s.nyquist_hz()
        )));
    }
    Ok(())
}

fn peak_over(s: &Spectrum, ranges: &[RangeInclusive<usize>]) -> f64 {
    let a = s.amplitudes();
    ranges
        .iter()
        .filter(|r| r.start() <= r.end())
        .flat_map(|r| {
            let end = (*r.end()).min(a.len() - 1);
            a.get(*r.start()..=end).unwrap_or(&[]).iter().copied()
        })
        .fold(0.0, f64::max)
}

/// Largest amplitude within the bands around harmonics 1..=`max_harmonic` of `center_hz`.
///
/// Each band spans `±half_width_frac` of its harmonic, but never less than
/// two bins either side. No clipping against other bands is applied; see
/// [`FaultBands`] for the non-overlapping outer/inner pair.
pub fn band_peak(
    s: &Spectrum,
    center_hz: f64,
    max_harmonic: usize,
    half_width_frac: f64,
) -> Result<f64> {
    check_range(s, center_hz, max_harmonic, half_width_frac)?;
    let ranges: Vec<_> = (1..=max_harmonic)
        .map(|k| {
            let (lo, hi) = harmonic_bins(center_hz, k, half_width_frac, s.bin_width_hz());
            lo..=hi
        })
        .collect();
    Ok(peak_over(s, &ranges))
}

/// Bin ranges for the outer- and inner-race harmonics, made mutually disjoint.
///
/// Where an outer band and an inner band overlap, both are cut at the
/// midpoint between their harmonic centers.
#[derive(Debug, Clone, PartialEq)]
pub struct FaultBands {
    pub outer: Vec<RangeInclusive<usize>>,
    pub inner: Vec<RangeInclusive<usize>>,
}

impl FaultBands {
    pub fn new(
        ff: &FaultFrequencies,
        s: &Spectrum,
        max_harmonic: usize,
        half_width_frac: f64,
    ) -> Result<Self> {
        check_range(s, ff.bpfo_hz, max_harmonic, half_width_frac)?;
        check_range(s, ff.bpfi_hz, max_harmonic, half_width_frac)?;
        let bw = s.bin_width_hz();
        let mut outer: Vec<(f64, usize, usize)> = (1..=max_harmonic)
            .map(|k| {
                let (lo, hi) = harmonic_bins(ff.bpfo_hz, k, half_width_frac, bw);
                (k as f64 * ff.bpfo_hz, lo, hi)
            })
            .collect();
        let mut inner: Vec<(f64, usize, usize)> = (1..=max_harmonic)
            .map(|k| {
                let (lo, hi) = harmonic_bins(ff.bpfi_hz, k, half_width_frac, bw);
                (k as f64 * ff.bpfi_hz, lo, hi)
            })
            .collect();
        for o in outer.iter_mut() {
            for i in inner.iter_mut() {
                if o.1 > i.2 || i.1 > o.2 {
                    continue;
                }
                let cut = ((o.0 + i.0) / 2.0 / bw).floor() as usize;
                // the lower-frequency band keeps bins up to the cut
                if o.0 <= i.0 {
                    o.2 = o.2.min(cut);
                    i.1 = i.1.max(cut + 1);
                } else {
                    i.2 = i.2.min(cut);
                    o.1 = o.1.max(cut + 1);
                }
            }
        }
        Ok(Self {
            outer: outer.into_iter().map(|(_, lo, hi)| lo..=hi).collect(),
            inner: inner.into_iter().map(|(_, lo, hi)| lo..=hi).collect(),
        })
    }

    pub fn outer_peak(&self, s: &Spectrum) -> f64 {
        peak_over(s, &self.outer)
    }

    pub fn inner_peak(&self, s: &Spectrum) -> f64 {
        peak_over(s, &self.inner)
    }

    /// Whether bin `k` falls in any outer or inner band.
    pub fn covers(&self, k: usize) -> bool {
        self.outer.iter().chain(&self.inner).any(|r| r.contains(&k))
    }
}
