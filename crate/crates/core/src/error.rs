use thiserror::Error;

/// Errors raised by the core engine.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("chunk overlap {overlap} must be smaller than chunk size {size}")]
    InvalidChunking { size: usize, overlap: usize },

    #[error("embedding dimension {got} does not match index dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("duplicate chunk key ({doc_id}, {chunk_index})")]
    DuplicateChunk { doc_id: String, chunk_index: usize },

    #[error("search over an empty index")]
    EmptyIndex,

    #[error("document {0} has empty text")]
    EmptyDocument(String),

    #[error("duplicate document id {0}")]
    DuplicateDocument(String),

    #[error("corpus line {line}: {message}")]
    CorpusFormat { line: usize, message: String },

    #[error("index snapshot: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
