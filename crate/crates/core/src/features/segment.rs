use crate::error::{Error, Result};
use crate::signal::TimeSeries;

pub const DEFAULT_WINDOW_S: f64 = 1.0;
pub const DEFAULT_OVERLAP_FRAC: f64 = 0.10;

/// Window length and hop in samples.
pub fn window_geometry(sample_rate_hz: f64, window_s: f64, overlap_frac: f64) -> Result<(usize, usize)> {
    if !(window_s.is_finite() && window_s > 0.0) {
        return Err(Error::InvalidSignal(format!("window length {window_s} s")));
    }
    if !(0.0..1.0).contains(&overlap_frac) {
        return Err(Error::InvalidSignal(format!("overlap fraction {overlap_frac}")));
    }
    let w = (window_s * sample_rate_hz).round() as usize;
    let hop = (w as f64 * (1.0 - overlap_frac)).round() as usize;
    if w == 0 || hop == 0 {
        return Err(Error::InvalidSignal(format!(
            "window of {window_s} s with overlap {overlap_frac} is empty at {sample_rate_hz} Hz"
        )));
    }
    Ok((w, hop))
}

/// Number of whole windows that fit in `n` samples.
pub fn window_count(n: usize, window: usize, hop: usize) -> usize {
    if n < window {
        0
    } else {
        (n - window) / hop + 1
    }
}

/// Splits `x` into overlapping fixed-length windows; the trailing partial window is dropped.
pub fn segment(x: &TimeSeries, window_s: f64, overlap_frac: f64) -> Result<Vec<TimeSeries>> {
    let (w, hop) = window_geometry(x.sample_rate_hz(), window_s, overlap_frac)?;
    if x.len() < w {
        return Err(Error::TooShort {
            needed: w,
            got: x.len(),
        });
    }
    (0..window_count(x.len(), w, hop))
        .map(|i| x.slice(i * hop, w))
        .collect()
}
