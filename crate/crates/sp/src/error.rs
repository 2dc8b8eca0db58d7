use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("empty symbol sequence")]
    EmptySequence,

    #[error("empty alphabet: cannot build a cost model from no tokens")]
    EmptyAlphabet,

    #[error("token `{0}` is missing from the cost model")]
    MissingToken(String),

    #[error("illegal alignment: {0}")]
    IllegalAlignment(String),

    #[error("size guard exceeded: {0}")]
    SizeGuard(String),

    #[error("merge would corrupt the alignment: {0}")]
    BadMerge(String),

    #[error("{0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
