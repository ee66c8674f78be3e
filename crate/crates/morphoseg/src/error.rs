use thiserror::Error;

/// Errors produced by the segmentation toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A marker scheme with duplicate, empty or otherwise unusable markers.
    #[error("invalid marker scheme: {0}")]
    InvalidScheme(String),

    /// An escape sequence that could not have been produced by `escape_corpus_token`.
    #[error("malformed escape sequence in {0:?}")]
    MalformedEscape(String),

    /// A marker-bearing token stream that violates the stream grammar
    /// (dangling separator, suffix with no stem, truncated continuation run).
    #[error("malformed token stream: {0}")]
    MalformedStream(String),

    /// A resource or data file that does not follow its declared format.
    #[error("{file}:{line}: {msg}")]
    Parse {
        file: String,
        line: usize,
        msg: String,
    },

    /// Invalid or incomplete pipeline configuration.
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn parse(file: impl Into<String>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            file: file.into(),
            line,
            msg: msg.into(),
        }
    }
}
