use std::path::PathBuf;

use thiserror::Error;

use crate::market::YearMonth;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A single rejected CSV row.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct RowError {
    /// 1-based data row (the header is not counted).
    pub row: usize,
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for RowError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "row {}: {}: {}", self.row, self.field, self.message)
    }
}

/// A rejected field of a JSON document.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0}")]
    Row(RowError),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid spec: {}", fmt_fields(.0))]
    InvalidSpec(Vec<FieldError>),

    #[error("no bookings in cohort")]
    EmptyCohort,

    #[error("{which} is not a probability vector: {detail}")]
    NotNormalized { which: &'static str, detail: String },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("horizon mismatch: {left} vs {right}")]
    HorizonMismatch { left: usize, right: usize },

    #[error("insufficient history: {0}")]
    InsufficientHistory(String),

    #[error("baseline year {0} has no distributions")]
    MissingBaseline(i32),

    #[error("series too short: {len} points, need at least {min}")]
    SeriesTooShort { len: usize, min: usize },

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("series has month gaps ({}); restrict the range to a contiguous span", fmt_months(.missing))]
    GappedSeries { missing: Vec<YearMonth> },

    #[error("no historical mass accrued at this horizon")]
    ZeroHistoricalMass,

    #[error("correlation undefined: {0}")]
    Degenerate(String),

    #[error("numeric solve failed: {0}")]
    NoConvergence(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn fmt_fields(fields: &[FieldError]) -> String {
    fields
        .iter()
        .map(|f| format!("{}: {}", f.field, f.message))
        .collect::<Vec<_>>()
        .join("; ")
}

fn fmt_months(months: &[YearMonth]) -> String {
    months
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for problems with the caller's input (bad files, bad flags), as opposed
    /// to failures of a computation on otherwise well-formed input.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::Row(_)
            | Error::InvalidArgument(_)
            | Error::InvalidSpec(_)
            | Error::Io { .. }
            | Error::Csv(_)
            | Error::Json(_) => true,
            Error::Context { source, .. } => source.is_input_error(),
            _ => false,
        }
    }
}
