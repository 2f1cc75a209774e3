use chrono::NaiveDate;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("gap at {date} slot {slot} with fill policy fail_on_gap")]
    Gap { date: NaiveDate, slot: usize },

    #[error("insufficient data: need at least {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("autocorrelation undefined for a zero-variance series")]
    UndefinedAcf,

    #[error("series are not aligned: {0}")]
    Alignment(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("estimation failed: {0}")]
    Estimation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Machine-parsable category, e.g. `data.parse` or `io.not_found`.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "data.parse",
            Error::Validation(_) => "data.validation",
            Error::Gap { .. } => "data.gap",
            Error::InsufficientData { .. } => "data.insufficient",
            Error::Alignment(_) => "data.alignment",
            Error::Domain(_) => "usage.domain",
            Error::UndefinedAcf => "numeric.undefined_acf",
            Error::Estimation(_) => "numeric.estimation",
            Error::Io(e) => match e.kind() {
                std::io::ErrorKind::NotFound => "io.not_found",
                std::io::ErrorKind::PermissionDenied => "io.permission_denied",
                _ => "io.other",
            },
            Error::Csv(e) => match e.kind() {
                csv::ErrorKind::Io(io) if io.kind() == std::io::ErrorKind::NotFound => "io.not_found",
                csv::ErrorKind::Io(_) => "io.other",
                _ => "data.parse",
            },
        }
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
