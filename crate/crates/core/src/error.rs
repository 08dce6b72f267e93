use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Ingest {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path} produced no headline records")]
    EmptySource { path: PathBuf },

    #[error("{path}:{line}: {message}")]
    MalformedLine {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("vocabulary is empty after filtering with min_count={min_count}; try a lower min_count")]
    EmptyVocabulary { min_count: usize },

    #[error("score is undefined: {0}")]
    UndefinedScore(&'static str),

    #[error("training diverged in epoch {epoch}: non-finite loss")]
    TrainingDiverged { epoch: usize },

    #[error("t-SNE diverged at iteration {iteration}: non-finite objective")]
    TsneDiverged { iteration: usize },

    #[error("all points are identical; two clusters cannot be formed")]
    DegenerateClusters,

    #[error("dimension mismatch: model expects {expected} features, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("length mismatch: {0} labels vs {1} predictions")]
    LengthMismatch(usize, usize),

    #[error("{0}")]
    SingleClass(&'static str),

    #[error("probability {0} is outside [0, 1]")]
    ProbabilityRange(f64),

    #[error("`{requested}` is out of order: the next step is `{next}`")]
    PhaseOrder {
        requested: &'static str,
        next: &'static str,
    },

    #[error("invalid rules file: {0}")]
    Rules(String),

    #[error("invalid model file: {0}")]
    ModelFormat(String),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 for data problems, 3 for numeric or
    /// training failures. Usage errors (1) are produced by argument parsing.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::TrainingDiverged { .. }
            | Error::TsneDiverged { .. }
            | Error::DegenerateClusters
            | Error::UndefinedScore(_)
            | Error::SingleClass(_) => 3,
            Error::Parameter(_) => 1,
            Error::Stage { source, .. } => source.exit_code(),
            _ => 2,
        }
    }

    /// Attach the failing stage's name unless one is already attached.
    pub fn in_stage(self, stage: &'static str) -> Error {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }
}
