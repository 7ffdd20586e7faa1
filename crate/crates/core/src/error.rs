use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A catalog row or file could not be parsed.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A record violates the catalog schema (missing/extra field, non-finite value).
    #[error("schema error{} at field `{field}`: {message}", .record.as_ref().map(|r| format!(" in record `{r}`")).unwrap_or_default())]
    Schema {
        record: Option<String>,
        field: String,
        message: String,
    },

    #[error("duplicate service id `{0}`")]
    DuplicateId(String),

    #[error("unknown fixed attribute `{0}`")]
    UnknownAttribute(String),

    #[error("missing dimension `{dimension}` on service `{service}`")]
    MissingDimension { service: String, dimension: String },

    #[error("unknown dimension `{0}`")]
    UnknownDimension(String),

    #[error("total criterion weight is zero")]
    ZeroWeight,

    #[error("invalid settings: {0}")]
    InvalidSettings(String),

    /// A query that parsed but violates a query invariant; `path` locates the field.
    #[error("invalid query at `{path}`: {message}")]
    InvalidQuery { path: String, message: String },

    #[error("invalid experiment plan: {0}")]
    InvalidPlan(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn schema(record: Option<&str>, field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            record: record.map(str::to_owned),
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn invalid_query(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidQuery {
            path: path.into(),
            message: message.into(),
        }
    }
}
