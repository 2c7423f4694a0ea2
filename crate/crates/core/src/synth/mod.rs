//! Synthetic bearing acoustics used as ground truth in tests and benchmarks.

mod dataset;
mod generator;

pub use dataset::{build_dataset, DatasetSpec, RecordingPlan, Split, SynthDataset};
pub use generator::{generate, generate_parts, SynthParts, SynthSpec};
