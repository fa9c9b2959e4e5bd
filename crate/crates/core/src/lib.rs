//! Incremental personalization of activity-recognition models.
//!
//! This crate holds the algorithmic core and is `no_std` (it needs `alloc`).
//! A stream of inertial windows is turned into a fixed feature vector, small
//! groups of weak classifiers (LDA, QDA or CART) are trained per data chunk and
//! appended to an equal-weight ensemble, and the labels used for each update
//! come from one of three strategies: the ensemble's own predictions, a
//! simulated user answering every window, or a mix where only windows with
//! low ensemble confidence are sent to the user and the answer is copied to
//! the two windows on either side.
//!
//! File formats, dataset loading, the experiment grid and the command line
//! live in the `incpers` crate.
//!
//! Module map:
//! * [`dataset`]: raw recordings, the class-balanced three-part split.
//! * [`features`]: windowing, derived signals and the feature catalog.
//! * [`classifiers`]: LDA, QDA and CART with class posteriors.
//! * [`ensemble`]: noise injection, forward feature selection, chunk training.
//! * [`personalization`]: the three labeling strategies and query accounting.
//! * [`metrics`]: confusion matrices and balanced accuracy.
//! * [`harness`]: leave-one-subject-out runs and summaries.

#![no_std]

extern crate alloc;

pub mod activity;
pub mod classifiers;
pub mod dataset;
pub mod ensemble;
pub mod error;
pub mod features;
pub mod harness;
pub mod metrics;
pub mod personalization;
pub mod samples;
pub mod seed;

pub use activity::{ActivityClass, BodyPosition, NUM_CLASSES};
pub use error::{Error, Result};
pub use samples::{FeatureMatrix, RowTag, Samples};

/// Crate version, recorded in experiment reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
