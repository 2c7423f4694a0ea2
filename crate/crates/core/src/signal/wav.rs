use std::path::Path;

use hound::{SampleFormat, WavReader, WavSpec, WavWriter};

use super::TimeSeries;
use crate::error::{Error, Result};

/// Reads a mono WAV file; integer PCM is scaled to [-1, 1).
///
/// Accepts 16/24/32-bit integer and 32-bit float samples.
pub fn read_wav(path: &Path) -> Result<TimeSeries> {
    let reader = WavReader::open(path).map_err(|e| match e {
        hound::Error::IoError(io) => Error::io(path, io),
        other => Error::UnsupportedAudio(format!("{}: {other}", path.display())),
    })?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return Err(Error::UnsupportedAudio(format!(
            "{}: {} channels, expected mono",
            path.display(),
            spec.channels
        )));
    }
    let bad = |e: hound::Error| Error::UnsupportedAudio(format!("{}: {e}", path.display()));
    let samples: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>()
            .map_err(bad)?,
        (SampleFormat::Int, bits @ (16 | 24 | 32)) => {
            let scale = (1u64 << (bits - 1)) as f64;
            reader
                .into_samples::<i32>()
                .map(|s| s.map(|v| v as f64 / scale))
                .collect::<std::result::Result<_, _>>()
                .map_err(bad)?
        }
        (fmt, bits) => {
            return Err(Error::UnsupportedAudio(format!(
                "{}: {bits}-bit {fmt:?} samples",
                path.display()
            )))
        }
    };
    TimeSeries::new(samples, spec.sample_rate as f64)
}

/// Writes `x` as mono 32-bit float WAV. The sample rate is rounded to whole hertz.
pub fn write_wav(path: &Path, x: &TimeSeries) -> Result<()> {
    let spec = WavSpec {
        channels: 1,
        sample_rate: x.sample_rate_hz().round() as u32,
        bits_per_sample: 32,
        sample_format: SampleFormat::Float,
    };
    let mut w = WavWriter::create(path, spec).map_err(|e| Error::io(path, e))?;
    for &s in x.samples() {
        w.write_sample(s as f32).map_err(|e| Error::io(path, e))?;
    }
    w.finalize().map_err(|e| Error::io(path, e))
}
