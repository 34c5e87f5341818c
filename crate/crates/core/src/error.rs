use std::io;

use thiserror::Error;

/// Errors raised by the library.
///
/// Variants fall into two families: problems with user-provided input
/// (malformed files, invalid parameters, missing data) and I/O or transport
/// failures. [`Error::is_input_error`] tells them apart for exit-code mapping.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid JSON at byte {offset}: {message}")]
    Json { offset: usize, message: String },

    #[error("{0}")]
    InvalidInput(String),

    #[error("empty map")]
    EmptyMap,

    #[error("unknown country code {0}")]
    UnknownCountry(String),

    #[error("missing centroid for {0}")]
    MissingCentroid(String),

    #[error("distribution is not normalized (sum = {0})")]
    Unnormalized(f64),

    #[error("ranking contains duplicate item {0}")]
    DuplicateInRanking(String),

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("remote knowledge base: {0}")]
    Remote(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for errors caused by the caller's data or parameters.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Io(_) | Error::Remote(_))
    }

    /// Short machine-readable tag for the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::Json { .. } => "json",
            Error::InvalidInput(_) => "invalid_input",
            Error::EmptyMap => "empty_map",
            Error::UnknownCountry(_) => "unknown_country",
            Error::MissingCentroid(_) => "missing_centroid",
            Error::Unnormalized(_) => "unnormalized",
            Error::DuplicateInRanking(_) => "duplicate_in_ranking",
            Error::LengthMismatch(_) => "length_mismatch",
            Error::Csv(_) => "csv",
            Error::Remote(_) => "remote",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
