use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("duplicate id {0:?}")]
    DuplicateId(String),

    #[error("embedding format error: {0}")]
    Format(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("row {0:?} has zero norm")]
    ZeroRow(String),

    #[error("empty vocabulary after pruning tokens below min_count")]
    EmptyVocabulary,

    #[error("unresolved keywords: {}", .0.join(", "))]
    UnresolvedKeywords(Vec<String>),

    #[error("unknown id {0:?}")]
    UnknownId(String),

    #[error("no topics remain after hiding")]
    NoTopicsRemain,

    #[error("power iteration did not converge after {0} iterations")]
    NoConvergence(usize),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
