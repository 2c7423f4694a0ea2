//! Acoustic ball-bearing diagnosis.
//!
//! The pipeline denoises each analysis window with the basis wavelet whose
//! detail coefficients maximize the kurtosis / spectral-entropy (KE) index,
//! extracts fourteen statistical-spectral features, and classifies five
//! bearing conditions with a 20-layer 1D residual network. A synthetic
//! bearing-acoustics generator stands in for recorded data in tests.

pub mod classifier;
pub mod error;
pub mod signal;
pub mod features;
pub mod pipeline;
pub mod synth;
pub mod wavelet;

pub use error::{Error, Result};
