//! Residual 1D convolutional classifier with hand-written backpropagation.

mod eval;
mod io;
pub mod layers;
mod model;
mod train;

pub use eval::{evaluate, Evaluation};
pub use io::{load_model, model_from_json, model_to_json, save_model, MODEL_FORMAT_VERSION};
pub use model::{argmax, Layout, Model, ModelConfig};
pub use train::{train, Adam, EpochStats, History, LabeledSet, TrainConfig};
