use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftDirection, FftPlanner};

use super::TimeSeries;
use crate::error::{Error, Result};

thread_local! {
    static PLANS: RefCell<HashMap<(usize, bool), Arc<dyn Fft<f64>>>> = RefCell::new(HashMap::new());
}

/// Cached FFT plan for `len` points.
///
/// A shared planner picks sub-algorithms based on what it already holds, which
/// makes results differ in the last bits between threads. Every length is
/// planned by a fresh planner so the output depends on the length alone.
pub(crate) fn fft_plan(len: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    let key = (len, direction == FftDirection::Forward);
    PLANS.with(|cache| {
        cache
            .borrow_mut()
            .entry(key)
            .or_insert_with(|| FftPlanner::new().plan_fft(len, direction))
            .clone()
    })
}

fn forward_dft(samples: &[f64]) -> Vec<Complex<f64>> {
    let mut buf: Vec<Complex<f64>> = samples.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fft_plan(buf.len(), FftDirection::Forward).process(&mut buf);
    buf
}

/// One-sided amplitude spectrum.
///
/// Amplitudes are scaled so that a sinusoid of amplitude `A` sitting exactly on
/// a bin reads `A`, and a constant `c` reads `|c|` in bin 0. With this scaling
/// Parseval reads `Σ x² = N·(s₀² + ½·Σ_mid s_k² + s_{N/2}²)` for even `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    amplitudes: Vec<f64>,
    bin_width_hz: f64,
    fft_len: usize,
}

impl Spectrum {
    pub fn new(amplitudes: Vec<f64>, bin_width_hz: f64, fft_len: usize) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::EmptySpectrum);
        }
        if !(bin_width_hz > 0.0 && bin_width_hz.is_finite()) {
            return Err(Error::InvalidSignal(format!("bin width {bin_width_hz}")));
        }
        if amplitudes.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return Err(Error::InvalidSignal(
                "spectrum amplitudes must be finite and non-negative".into(),
            ));
        }
        Ok(Self {
            amplitudes,
            bin_width_hz,
            fft_len,
        })
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn bin_width_hz(&self) -> f64 {
        self.bin_width_hz
    }

    /// Length of the transform the spectrum came from.
    pub fn fft_len(&self) -> usize {
        self.fft_len
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn nyquist_hz(&self) -> f64 {
        self.bin_width_hz * self.fft_len as f64 / 2.0
    }

    pub fn frequency_of(&self, bin: usize) -> f64 {
        bin as f64 * self.bin_width_hz
    }
}

fn one_sided(dft: &[Complex<f64>]) -> Vec<f64> {
    let n = dft.len();
    let k = n / 2 + 1;
    let inv_n = 1.0 / n as f64;
    (0..k)
        .map(|i| {
            let mag = dft[i].norm() * inv_n;
            if i == 0 || (n % 2 == 0 && i == n / 2) {
                mag
            } else {
                2.0 * mag
            }
        })
        .collect()
}

/// Rectangular-window magnitude spectrum with `floor(N/2) + 1` bins.
pub fn magnitude_spectrum(x: &TimeSeries) -> Result<Spectrum> {
    let n = x.len();
    if n < 2 {
        return Err(Error::TooShort { needed: 2, got: n });
    }
    let dft = forward_dft(x.samples());
    Spectrum::new(one_sided(&dft), x.sample_rate_hz() / n as f64, n)
}

/// Spectrum of the mean-removed Hilbert envelope of `x`.
///
/// The envelope is the magnitude of the analytic signal; its mean is removed so
/// the DC term does not dominate the spectrum statistics.
pub fn envelope_spectrum(x: &TimeSeries) -> Result<Spectrum> {
    let n = x.len();
    if n < 2 {
        return Err(Error::TooShort { needed: 2, got: n });
    }
    let mut buf = forward_dft(x.samples());
    // analytic signal: keep DC (and Nyquist), double positive bins, zero negative bins
    let half = n / 2;
    for (i, c) in buf.iter_mut().enumerate() {
        if i == 0 || (n % 2 == 0 && i == half) {
            continue;
        }
        if i < n.div_ceil(2) {
            *c *= 2.0;
        } else {
            *c = Complex::new(0.0, 0.0);
        }
    }
    fft_plan(n, FftDirection::Inverse).process(&mut buf);
    let inv_n = 1.0 / n as f64;
    let env: Vec<f64> = buf.iter().map(|c| c.norm() * inv_n).collect();
    let mu = super::mean(&env);
    let centered: Vec<f64> = env.iter().map(|v| v - mu).collect();
    let dft = forward_dft(&centered);
    Spectrum::new(one_sided(&dft), x.sample_rate_hz() / n as f64, n)
}
