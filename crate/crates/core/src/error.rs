use thiserror::Error;

/// Errors produced anywhere in the identification pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// A PGM stream could not be decoded; `field` names the offending header field or `payload`.
    #[error("pgm {field}: {detail}")]
    Format { field: &'static str, detail: String },

    #[error("image too small: {rows}x{cols}, need at least {min}x{min}")]
    Size { rows: usize, cols: usize, min: usize },

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("cannot decompose {rows}x{cols} image to {levels} levels: {reason}")]
    Depth {
        rows: usize,
        cols: usize,
        levels: usize,
        reason: String,
    },

    #[error("inconsistent pyramid: {0}")]
    Structure(String),

    #[error("dimension mismatch: {left} vs {right}")]
    Dimension { left: usize, right: usize },

    #[error("incompatible feature database: {0}")]
    Incompatible(String),

    #[error("feature database is empty")]
    EmptyDatabase,

    #[error("feature database line {line}: {detail}")]
    Database { line: usize, detail: String },

    #[error("filter table line {line}: {detail}")]
    FilterTable { line: usize, detail: String },

    #[error("invalid filter: {0}")]
    Filter(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("corpus: {0}")]
    Corpus(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
