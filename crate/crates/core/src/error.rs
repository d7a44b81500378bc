use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A pivot fell below the relative threshold while factoring a bordered
    /// system. `system` names which system failed (e.g. the class +1 system).
    #[error("singular system ({system}): pivot {pivot:e} at elimination step {step}")]
    SingularSystem {
        system: String,
        step: usize,
        pivot: f64,
    },

    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),

    #[error("class {0} has no samples")]
    EmptyClass(&'static str),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("degenerate split: {0}")]
    DegenerateSplit(String),

    #[error("too few samples: {n} samples cannot be split into {folds} folds")]
    TooFewSamples { n: usize, folds: usize },

    #[error("degenerate statistic: {0}")]
    DegenerateStatistic(String),

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("more than two classes present: {0:?}")]
    MoreThanTwoClasses(Vec<String>),

    #[error("expected exactly two classes, found {0:?}")]
    TooFewClasses(Vec<String>),

    #[error("missing column: {0}")]
    MissingColumn(String),

    #[error("feature count mismatch: model expects {expected} features, data has {found}")]
    FeatureCountMismatch { expected: usize, found: usize },

    #[error("task mismatch: {0}")]
    TaskMismatch(String),

    #[error("unsupported model file version {found} (this build reads version {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("corrupt model file: {0}")]
    CorruptModel(String),

    #[error("grid search failed: {0}")]
    GridFailed(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Relabel a singular-system error with the name of the system that failed.
    pub(crate) fn in_system(self, name: &str) -> Self {
        match self {
            Error::SingularSystem { step, pivot, .. } => Error::SingularSystem {
                system: name.to_string(),
                step,
                pivot,
            },
            other => other,
        }
    }

    /// True for failures of the numerics rather than of the input data.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::SingularSystem { .. } | Error::DegenerateStatistic(_) | Error::GridFailed(_)
        )
    }
}
