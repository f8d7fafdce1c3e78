//! Deterministic retrieval-augmented generation engine.
//!
//! The engine covers the three pipeline phases: offline ingestion
//! (chunking + embedding into a vector index), online retrieval (exact
//! cosine top-k), and augmentation (byte-stable prompt assembly feeding a
//! pluggable generator). Everything here is deterministic by construction
//! so that security behaviour layered on top can be replayed bit-for-bit.

pub mod chunk;
pub mod corpus;
pub mod embed;
pub mod engine;
pub mod error;
pub mod generate;
pub mod index;
pub mod prompt;
pub mod tokenize;
pub mod types;

pub use chunk::chunk_document;
pub use corpus::{load_corpus_jsonl, write_corpus_jsonl};
pub use embed::{Embedder, HashingEmbedder};
pub use engine::{EngineOutput, RagEngine};
pub use error::CoreError;
pub use generate::{
    EchoGenerator, ExtractiveGenerator, GenerationError, Generator, ModelEndpoint, PromptParts,
    RemoteGenerator, Role, REFUSAL_TEXT,
};
pub use index::{IndexSnapshot, VectorIndex};
pub use prompt::augment_prompt;
pub use tokenize::{sentences, tokenize, tokenize_spans};
pub use types::{
    Chunk, Document, EmbeddingVector, GeneratedAnswer, Query, ScoredChunk, TraceTag,
};
