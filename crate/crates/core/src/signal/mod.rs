//! Spectral and statistical primitives shared by the denoiser and the feature bank.
//!
//! Everything here is a pure function of its inputs. Spectra feeding the KE
//! index and the feature bank use a rectangular window; the Mel spectrogram
//! uses Hann-windowed frames and exists for visual inspection only.

mod mel;
mod series;
mod spectrum;
mod stats;
mod wav;

pub use mel::{log_mel_spectrogram, MelParams, MelSpectrogram, LOG_FLOOR};
pub use series::{TimeSeries, DEFAULT_SAMPLE_RATE_HZ};
pub use spectrum::{envelope_spectrum, magnitude_spectrum, Spectrum};
pub use stats::{ke_index, kurtosis, mean, spectral_entropy, KE_ENTROPY_FLOOR};
pub use wav::{read_wav, write_wav};

pub(crate) use spectrum::fft_plan;
