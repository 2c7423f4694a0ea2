mod bands;
mod extract;
mod kinematics;
mod normalize;
mod segment;
mod table;

pub use bands::{band_peak, FaultBands, DEFAULT_HALF_WIDTH_FRAC, DEFAULT_MAX_HARMONIC, MIN_HALF_WIDTH_BINS};
pub use extract::{
    extract_all, extract_features, Condition, FaultSite, FeatureOptions, FeatureVector, N_FEATURES,
};
pub use kinematics::{fault_frequencies, BearingGeometry, FaultFrequencies, DEFAULT_SHAFT_HZ};
pub use normalize::{apply_normalization, denormalize, normalize, NormalizationStats};
pub use segment::{segment, window_count, window_geometry, DEFAULT_OVERLAP_FRAC, DEFAULT_WINDOW_S};
pub use table::{read_feature_csv, write_feature_csv};
