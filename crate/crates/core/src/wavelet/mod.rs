//! Discrete wavelet transform, universal-threshold shrinkage and KE-guided
//! wavelet selection.

mod denoise;
mod registry;
mod transform;

pub use denoise::{
    denoise, select_wavelet, shrink, soft_threshold, universal_threshold, DenoiseOptions,
    DenoiseReport, Denoised, KeEntry, KeSource, DEFAULT_LEVEL,
};
pub use registry::{list_bank, load_filter_bank, FilterBank, Registry};
pub use transform::{coeff_len, dwt, idwt, Padding, WaveletDecomposition};
