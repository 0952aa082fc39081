use chrono::{DateTime, Utc};
use thiserror::Error;

/// Errors produced by the forecasting toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("duplicate timestamp {0}")]
    DuplicateTimestamp(DateTime<Utc>),

    #[error("timestamps not strictly increasing at {0}")]
    NonMonotone(DateTime<Utc>),

    #[error("timestamp {0} is off the {1}s sampling grid")]
    OffGrid(DateTime<Utc>, u32),

    #[error("negative or non-finite traffic value {value} at {at}")]
    InvalidValue { at: DateTime<Utc>, value: f64 },

    #[error("all entries are missing")]
    AllMissing,

    #[error("series has missing entries")]
    HasMissing,

    #[error("series must start at midnight GMT, got {0}")]
    NotDayAligned(DateTime<Utc>),

    #[error("series too short: need {needed}, have {have}")]
    TooShort { needed: usize, have: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("series is constant")]
    ConstantSeries,

    #[error("singular system in {0}")]
    Singular(&'static str),

    #[error("transition is not stationary")]
    NonStationary,

    #[error("exogenous column `{0}` is degenerate after differencing")]
    DegenerateExog(String),

    #[error("exogenous data mismatch: {0}")]
    ExogMismatch(String),

    #[error("no converged candidate")]
    NoConvergedCandidate,

    #[error("all {} candidates failed: {}", .0.len(), .0.join("; "))]
    AllCandidatesFailed(Vec<String>),

    #[error("{model}: {source}")]
    Model {
        model: String,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error at {at}: {msg}")]
    Parse { at: String, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Attaches a model identity to an error.
    pub fn in_model(self, model: impl Into<String>) -> Self {
        Error::Model {
            model: model.into(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
