//! From raw 6-channel windows to one fixed-length feature row.
//!
//! Each 210-sample window (4.2 s at 50 Hz, sliding by 70 samples) is expanded
//! into 14 channels: the six raw axes, the accelerometer and gyroscope
//! magnitudes, and the six pairwise square sums. Every channel contributes the
//! same block of 40 features (8 order statistics, 24 percentile-relative
//! aggregates, 8 spectral descriptors), giving 560 columns in the standard
//! [`FeatureCatalog`].

mod catalog;
mod signals;
mod spectral;
mod stats;
mod window;

pub use catalog::{
    extract_features, extract_matrix, AggregateKind, Extractor, FeatureCatalog, FeatureSpec, SpectralKind,
    FEATURES_PER_CHANNEL,
};
pub use signals::{derive_signals, Channel, DerivedSignals, NUM_CHANNELS};
pub use spectral::{frequency_features, FrequencyFeatures, SpectralTable, BANDS_HZ};
pub use stats::{
    percentile, percentile_aggregates, percentile_sorted, population_std, sign_changes, PercentileAggregates,
    PERCENTILE_LEVELS,
};
pub use window::{sliding_windows, RawWindow, WindowSpec};
