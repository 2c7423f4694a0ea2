use serde::{Deserialize, Serialize};

use super::FilterBank;
use crate::error::{Error, Result};
use crate::signal::TimeSeries;

/// Boundary extension used by the transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Padding {
    /// Half-sample symmetric: `… x1 x0 | x0 x1 … xn-1 | xn-1 xn-2 …`
    Symmetric,
}

/// Approximation plus per-level detail coefficients (level 1 = finest).
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletDecomposition {
    pub approx: Vec<f64>,
    pub details: Vec<Vec<f64>>,
    pub original_length: usize,
    pub padding: Padding,
    pub filter_len: usize,
    pub sample_rate_hz: f64,
}

impl WaveletDecomposition {
    pub fn levels(&self) -> usize {
        self.details.len()
    }

    /// Detail sequences concatenated finest to coarsest.
    pub fn concatenated_details(&self) -> Vec<f64> {
        self.details.iter().flatten().copied().collect()
    }

    /// Same shape, every coefficient zero.
    pub fn zeroed(&self) -> Self {
        Self {
            approx: vec![0.0; self.approx.len()],
            details: self.details.iter().map(|d| vec![0.0; d.len()]).collect(),
            ..self.clone()
        }
    }

    /// Coefficient-wise sum of two decompositions of identical shape.
    pub fn try_add(&self, other: &Self) -> Result<Self> {
        let same_shape = self.approx.len() == other.approx.len()
            && self.original_length == other.original_length
            && self.filter_len == other.filter_len
            && self.details.len() == other.details.len()
            && self
                .details
                .iter()
                .zip(&other.details)
                .all(|(a, b)| a.len() == b.len());
        if !same_shape {
            return Err(Error::InconsistentDecomposition(
                "cannot add decompositions of different shape".into(),
            ));
        }
        let add = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x + y).collect();
        Ok(Self {
            approx: add(&self.approx, &other.approx),
            details: self
                .details
                .iter()
                .zip(&other.details)
                .map(|(a, b)| add(a, b))
                .collect(),
            ..self.clone()
        })
    }
}

/// Output length of one analysis step on `n` samples with an `f`-tap filter.
pub fn coeff_len(n: usize, f: usize) -> usize {
    (n + f - 1) / 2
}

/// Input lengths per level: `[original, level-1 approx, …]`, `level + 1` entries.
fn level_lengths(original: usize, f: usize, level: usize) -> Vec<usize> {
    let mut lens = Vec::with_capacity(level + 1);
    lens.push(original);
    for _ in 0..level {
        let n = *lens.last().unwrap();
        lens.push(coeff_len(n, f));
    }
    lens
}

#[inline]
fn symmetric_index(k: isize, n: usize) -> usize {
    let period = 2 * n as isize;
    let m = k.rem_euclid(period) as usize;
    if m < n {
        m
    } else {
        2 * n - 1 - m
    }
}

/// One Mallat analysis step: returns `(approx, detail)`.
fn analysis_step(x: &[f64], lo_rev: &[f64], hi_rev: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = x.len();
    let f = lo_rev.len();
    let out = coeff_len(n, f);
    let pad = f - 1;
    let ext: Vec<f64> = (0..n + 2 * pad)
        .map(|k| x[symmetric_index(k as isize - pad as isize, n)])
        .collect();
    let mut approx = Vec::with_capacity(out);
    let mut detail = Vec::with_capacity(out);
    for i in 0..out {
        let window = &ext[2 * i + 1..2 * i + 1 + f];
        let (mut a, mut d) = (0.0, 0.0);
        for ((w, l), h) in window.iter().zip(lo_rev).zip(hi_rev) {
            a += w * l;
            d += w * h;
        }
        approx.push(a);
        detail.push(d);
    }
    (approx, detail)
}

/// One synthesis step producing `out_len` samples.
fn synthesis_step(
    approx: &[f64],
    detail: &[f64],
    rec_lo: &[f64],
    rec_hi: &[f64],
    out_len: usize,
) -> Vec<f64> {
    let f = rec_lo.len();
    let mut y = vec![0.0; out_len];
    for (i, (&a, &d)) in approx.iter().zip(detail).enumerate() {
        // y[2i + j - (f - 2)] += rec_lo[j]·a + rec_hi[j]·d
        let base = 2 * i as isize - (f as isize - 2);
        let j0 = (-base).max(0) as usize;
        let j1 = ((out_len as isize - base).min(f as isize)).max(0) as usize;
        for j in j0..j1 {
            y[(base + j as isize) as usize] += rec_lo[j] * a + rec_hi[j] * d;
        }
    }
    y
}

/// Multi-level forward transform with symmetric boundary extension.
pub fn dwt(x: &TimeSeries, fb: &FilterBank, level: usize) -> Result<WaveletDecomposition> {
    let f = fb.filter_len();
    let lens = level_lengths(x.len(), f, level);
    if level == 0 || lens[..level].iter().any(|&n| n < 2) {
        return Err(Error::TooShallow {
            level,
            len: x.len(),
        });
    }
    let lo_rev: Vec<f64> = fb.dec_lo.iter().rev().copied().collect();
    let hi_rev: Vec<f64> = fb.dec_hi.iter().rev().copied().collect();
    let mut current = x.samples().to_vec();
    let mut details = Vec::with_capacity(level);
    for _ in 0..level {
        let (a, d) = analysis_step(&current, &lo_rev, &hi_rev);
        details.push(d);
        current = a;
    }
    Ok(WaveletDecomposition {
        approx: current,
        details,
        original_length: x.len(),
        padding: Padding::Symmetric,
        filter_len: f,
        sample_rate_hz: x.sample_rate_hz(),
    })
}

/// Inverse transform; the output is trimmed to the original length.
pub fn idwt(d: &WaveletDecomposition, fb: &FilterBank) -> Result<TimeSeries> {
    let f = fb.filter_len();
    let level = d.levels();
    let inconsistent = |why: String| Err(Error::InconsistentDecomposition(why));
    if level == 0 {
        return inconsistent("no detail levels".into());
    }
    if d.filter_len != f {
        return inconsistent(format!(
            "decomposed with {}-tap filters, reconstructing with {}",
            d.filter_len, f
        ));
    }
    let lens = level_lengths(d.original_length, f, level);
    if d.approx.len() != lens[level] {
        return inconsistent(format!(
            "approximation has {} coefficients, expected {}",
            d.approx.len(),
            lens[level]
        ));
    }
    for (j, det) in d.details.iter().enumerate() {
        if det.len() != lens[j + 1] {
            return inconsistent(format!(
                "level {} has {} coefficients, expected {}",
                j + 1,
                det.len(),
                lens[j + 1]
            ));
        }
    }
    let mut current = d.approx.clone();
    for j in (0..level).rev() {
        current = synthesis_step(&current, &d.details[j], &fb.rec_lo, &fb.rec_hi, lens[j]);
    }
    TimeSeries::new(current, d.sample_rate_hz)
}
