use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Schema violation; `field` is the JSON/TOML path of the offending value.
    #[error("parse error at `{field}`: {message}")]
    Parse { field: String, message: String },

    #[error("format error: {0}")]
    Format(String),

    #[error("reference error: {0}")]
    Reference(String),

    #[error("trace too short: {0}")]
    TooShort(String),

    #[error("no cut-in detected")]
    NoCutIn,

    #[error("segmentation error: {0}")]
    Segmentation(String),

    #[error("grid spec mismatch between layers")]
    GridMismatch,

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("degenerate trace: min equals max, cannot normalize")]
    DegenerateTrace,

    #[error("empty window: {0}")]
    EmptyWindow(String),

    #[error("window outside span: {0}")]
    Window(String),

    #[error("no ratings: {0}")]
    NoRatings(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}
