//! End-to-end processing: window-level denoising and features, and the
//! four-way input/denoising comparison.

mod ablation;
mod config;
mod run;
mod window;

pub use ablation::{labeled_sets, run_ablation, run_variants, AblationConfig, AblationReport, AblationRow, Variant};
pub use config::{Manifest, ManifestEntry, PipelineConfig, SplitTag, CONFIG_VERSION, MANIFEST_VERSION};
pub use run::{manifest_windows, run_pipeline, run_pipeline_variants, write_report};
pub use window::{downsample, process_window, subsample, ProcessingConfig, RawDecimation, WindowRecord};
