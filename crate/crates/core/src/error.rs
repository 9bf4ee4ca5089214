use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse failure class, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Data,
    Numeric,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{what} line {line}: {message}")]
    Format {
        what: &'static str,
        line: usize,
        message: String,
    },

    #[error("bad model file: {0}")]
    ModelFile(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("configuration contradiction: {0}")]
    Config(String),

    #[error("labeling has {got} labels but the sentence has {expected} tokens")]
    LengthMismatch { expected: usize, got: usize },

    #[error("id {id} out of range for {what} of size {size}")]
    IdOutOfRange { what: &'static str, id: usize, size: usize },

    #[error("no tokens were scored")]
    NoScoredTokens,

    #[error("non-finite log probability in sentence {sentence}, position {position}")]
    NonFinite { sentence: usize, position: usize },

    #[error("training diverged at epoch {epoch}: validation perplexity {valid_ppl}")]
    Divergence { epoch: usize, valid_ppl: f64 },

    #[error("distribution sums to {sum}, not 1")]
    Unnormalized { sum: f64 },

    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{}: {source}", path.display())]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidArgument(_) | Error::Config(_) => ErrorKind::Usage,
            Error::NoScoredTokens | Error::NonFinite { .. } | Error::Divergence { .. } | Error::Unnormalized { .. } => {
                ErrorKind::Numeric
            }
            Error::Fold { source, .. } => source.kind(),
            _ => ErrorKind::Data,
        }
    }

    pub(crate) fn file(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::File {
            path: path.into(),
            source,
        }
    }
}
