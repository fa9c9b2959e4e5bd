use alloc::string::String;

use crate::activity::ActivityClass;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("unknown activity label {0:?}")]
    UnknownActivity(String),
    #[error("unknown body position {0:?}")]
    UnknownPosition(String),
    #[error("recording has {samples} samples but {labels} labels")]
    LengthMismatch { samples: usize, labels: usize },
    #[error("sample rate must be 50 Hz, got {0}")]
    InvalidSampleRate(f64),
    #[error("recording has {len} samples, shorter than one {window}-sample window")]
    RecordingTooShort { len: usize, window: usize },
    #[error("class {class} has {count} windows, at least 3 are needed for the split")]
    InsufficientClassData { class: ActivityClass, count: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("feature {name} evaluated to {value}")]
    NonFiniteFeature { name: String, value: f64 },
    #[error("class {class} has {count} training rows, at least 2 are needed")]
    DegenerateClass { class: ActivityClass, count: usize },
    #[error("at least two classes are needed, got {0}")]
    TooFewClasses(usize),
    #[error("covariance matrix is not positive definite")]
    SingularCovariance,
    #[error("shrinkage must lie in [0, 1], got {0}")]
    InvalidShrinkage(f64),
    #[error("expected {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("ensemble has no base models")]
    EmptyEnsemble,
    #[error("chunk has no rows")]
    EmptyChunk,
    #[error("no training rows")]
    EmptyTrainingSet,
    #[error("class {0} has no rows in the test set")]
    MissingClassInTest(ActivityClass),
    #[error("invalid training recipe: {0}")]
    InvalidRecipe(&'static str),
    #[error("oracle holds {oracle} labels for a chunk of {rows} rows")]
    OracleMismatch { oracle: usize, rows: usize },
    #[error("subject index {0} out of range")]
    UnknownSubject(usize),
    #[error("training rows of subject {subject} part {part} reached a model evaluated on them")]
    TestLeakage { subject: u16, part: u8 },
    #[error("at least two subjects are needed for leave-one-subject-out runs, got {0}")]
    TooFewSubjects(usize),
}
