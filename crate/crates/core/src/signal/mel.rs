use std::f64::consts::PI;
use std::fmt::Write as _;

use rustfft::num_complex::Complex;

use super::{fft_plan, TimeSeries};
use crate::error::{Error, Result};

/// Added to band power before the logarithm.
pub const LOG_FLOOR: f64 = 1e-10;

fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MelParams {
    pub frame_len_s: f64,
    pub hop_s: f64,
    pub n_bands: usize,
    pub fmin_hz: f64,
    pub fmax_hz: f64,
}

impl MelParams {
    /// 40 ms frames, 10 ms hop, 64 bands spanning 0 Hz to Nyquist.
    pub fn for_rate(sample_rate_hz: f64) -> Self {
        Self {
            frame_len_s: 0.04,
            hop_s: 0.01,
            n_bands: 64,
            fmin_hz: 0.0,
            fmax_hz: sample_rate_hz / 2.0,
        }
    }

    /// Band edges in Hz: `n_bands + 2` points equally spaced on the Mel scale.
    pub fn band_edges_hz(&self) -> Vec<f64> {
        let lo = hz_to_mel(self.fmin_hz);
        let hi = hz_to_mel(self.fmax_hz);
        let step = (hi - lo) / (self.n_bands + 1) as f64;
        (0..self.n_bands + 2)
            .map(|i| mel_to_hz(lo + step * i as f64))
            .collect()
    }
}

/// Log-power Mel spectrogram, one row per frame.
#[derive(Debug, Clone, PartialEq)]
pub struct MelSpectrogram {
    values: Vec<Vec<f64>>,
    frame_hop_s: f64,
    band_centers_hz: Vec<f64>,
}

impl MelSpectrogram {
    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn frame_hop_s(&self) -> f64 {
        self.frame_hop_s
    }

    pub fn band_centers_hz(&self) -> &[f64] {
        &self.band_centers_hz
    }

    pub fn n_frames(&self) -> usize {
        self.values.len()
    }

    /// Plain numeric matrix, one frame per line.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in &self.values {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        out
    }

    /// Binary 8-bit PGM (P5); one image row per frame, bands left to right.
    ///
    /// Each row is stretched so its maximum maps to 255 and its minimum to 0.
    pub fn to_pgm(&self) -> Vec<u8> {
        let width = self.band_centers_hz.len();
        let height = self.values.len();
        let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
        for row in &self.values {
            let hi = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lo = row.iter().cloned().fold(f64::INFINITY, f64::min);
            let span = hi - lo;
            out.extend(row.iter().map(|v| {
                if span > 0.0 {
                    (255.0 * (v - lo) / span).round().clamp(0.0, 255.0) as u8
                } else {
                    0
                }
            }));
        }
        out
    }
}

pub fn log_mel_spectrogram(x: &TimeSeries, params: &MelParams) -> Result<MelSpectrogram> {
    let fs = x.sample_rate_hz();
    let frame = (params.frame_len_s * fs).round() as usize;
    let hop = (params.hop_s * fs).round() as usize;
    if frame < 2 || hop < 1 {
        return Err(Error::TooShort {
            needed: 2,
            got: frame.min(hop),
        });
    }
    if params.n_bands == 0
        || !(params.fmin_hz >= 0.0)
        || !(params.fmin_hz < params.fmax_hz)
        || params.fmax_hz > fs / 2.0
    {
        return Err(Error::BadBandRange(format!(
            "{} bands over [{}, {}] Hz at {} Hz",
            params.n_bands, params.fmin_hz, params.fmax_hz, fs
        )));
    }
    let n = x.len();
    if n < frame {
        return Err(Error::TooShort {
            needed: frame,
            got: n,
        });
    }
    let n_frames = (n - frame) / hop + 1;

    let edges = params.band_edges_hz();
    let n_bins = frame / 2 + 1;
    let bin_hz = fs / frame as f64;
    // weights[b] = (first bin, weights...) for the triangle of band b
    let filters: Vec<Vec<(usize, f64)>> = (0..params.n_bands)
        .map(|b| {
            let (lo, c, hi) = (edges[b], edges[b + 1], edges[b + 2]);
            (0..n_bins)
                .filter_map(|k| {
                    let f = k as f64 * bin_hz;
                    let w = if f >= lo && f <= c && c > lo {
                        (f - lo) / (c - lo)
                    } else if f > c && f <= hi && hi > c {
                        (hi - f) / (hi - c)
                    } else {
                        0.0
                    };
                    (w > 0.0).then_some((k, w))
                })
                .collect()
        })
        .collect();

    let window: Vec<f64> = (0..frame)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / frame as f64).cos())
        .collect();
    let fft = fft_plan(frame, rustfft::FftDirection::Forward);
    let samples = x.samples();
    let mut buf = vec![Complex::new(0.0, 0.0); frame];
    let mut power = vec![0.0; n_bins];
    let mut values = Vec::with_capacity(n_frames);
    for f in 0..n_frames {
        let start = f * hop;
        for (i, b) in buf.iter_mut().enumerate() {
            *b = Complex::new(samples[start + i] * window[i], 0.0);
        }
        fft.process(&mut buf);
        for (k, p) in power.iter_mut().enumerate() {
            *p = buf[k].norm_sqr() / frame as f64;
        }
        values.push(
            filters
                .iter()
                .map(|tri| (tri.iter().map(|&(k, w)| w * power[k]).sum::<f64>() + LOG_FLOOR).ln())
                .collect(),
        );
    }
    Ok(MelSpectrogram {
        values,
        frame_hop_s: hop as f64 / fs,
        band_centers_hz: edges[1..=params.n_bands].to_vec(),
    })
}
