use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {message}")]
    Parameter { field: String, message: String },
    #[error("argument outside supported range: {0}")]
    Range(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("resource budget exceeded: {0}")]
    Resource(String),
    #[error("computation failed: {0}")]
    Computation(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn param(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parameter {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parameter { .. } => "parameter",
            Error::Range(_) => "range",
            Error::Shape(_) => "shape",
            Error::Resource(_) => "resource",
            Error::Computation(_) => "computation",
            Error::Format(_) => "format",
            Error::Io(_) => "io",
        }
    }

    /// The offending field for parameter errors.
    pub fn field(&self) -> Option<&str> {
        match self {
            Error::Parameter { field, .. } => Some(field),
            _ => None,
        }
    }

    pub fn report(&self) -> ErrorReport {
        ErrorReport {
            kind: self.kind().to_string(),
            field: self.field().map(str::to_string),
            message: self.to_string(),
        }
    }
}

/// Machine-readable form of an [`Error`].
#[derive(Debug, Clone, Serialize)]
pub struct ErrorReport {
    pub kind: String,
    pub field: Option<String>,
    pub message: String,
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Format(e.to_string())
    }
}
