//! Dataset files, the experiment grid, reports and the command line for
//! `incpers-core`.

pub mod io;
pub mod model_io;
pub mod pipeline;
pub mod report;
pub mod synth;

pub use incpers_core as core;
