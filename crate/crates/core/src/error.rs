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

    #[error("malformed record at {path}:{line}: {message}")]
    Record {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("page {url} has empty html")]
    EmptyPage { url: String },

    #[error("invalid pattern at line {line}: {message}")]
    Pattern { line: usize, message: String },

    #[error("region yields an empty fragment under every extraction rule")]
    EmptyFragment,

    #[error("invalid lexicon: {0}")]
    Lexicon(String),

    #[error("cannot train on an empty {0}")]
    EmptyTraining(&'static str),

    #[error("nothing in the text is scorable by the {0}")]
    Unscorable(&'static str),

    #[error("model file {path} was built with tokenizer `{found}`, configured tokenizer is `{expected}`")]
    TokenizerMismatch {
        path: PathBuf,
        expected: String,
        found: String,
    },

    #[error("unsupported model format in {path}: {message}")]
    ModelFormat { path: PathBuf, message: String },

    #[error("term `{0}` not found in store")]
    NotFound(String),

    #[error("invalid question {id}: {message}")]
    Question { id: String, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("external tokenizer failed: {0}")]
    Tokenizer(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
