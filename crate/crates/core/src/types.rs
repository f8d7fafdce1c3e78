//! Domain types shared across the pipeline.

use serde::{Deserialize, Serialize};

/// A corpus document. `is_poison` is a ground-truth label used only by the
/// evaluation harness; the pipeline itself never reads it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
    #[serde(default)]
    pub is_poison: bool,
}

impl Document {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        Self { id: id.into(), text: text.into(), is_poison: false }
    }

    pub fn poison(id: impl Into<String>, text: impl Into<String>) -> Self {
        Self { id: id.into(), text: text.into(), is_poison: true }
    }
}

/// A contiguous token window of one document. `token_span` is the
/// half-open `[start, end)` range in the document's token sequence; `text`
/// is the original byte slice covering those tokens.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chunk {
    pub doc_id: String,
    pub chunk_index: usize,
    pub token_span: (usize, usize),
    pub text: String,
}

/// Dense vector with unit L2 norm (or the first basis vector when the
/// source text had no tokens).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector {
    pub values: Vec<f64>,
}

impl EmbeddingVector {
    /// Normalize `values` to unit L2 norm. An all-zero input maps to the
    /// first basis vector so cosines stay finite.
    pub fn normalized(mut values: Vec<f64>) -> Self {
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            for v in &mut values {
                *v /= norm;
            }
        } else if let Some(first) = values.first_mut() {
            *first = 1.0;
        }
        Self { values }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Cosine similarity. Inputs are unit-norm so this is a clamped dot
    /// product.
    pub fn cosine(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.values.len(), other.values.len());
        let dot: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum();
        dot.clamp(-1.0, 1.0)
    }
}

/// Ground-truth label carried by evaluation traces. The data plane treats
/// every query identically regardless of tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TraceTag {
    Benign,
    PoisonTrigger,
    MiaProbe,
}

/// An incoming user query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Query {
    pub user_id: String,
    pub text: String,
    /// Seconds since epoch. Must be non-decreasing within one user's trace.
    pub timestamp: f64,
    #[serde(default = "default_tag")]
    pub trace_tag: TraceTag,
}

fn default_tag() -> TraceTag {
    TraceTag::Benign
}

impl Query {
    pub fn new(user_id: impl Into<String>, text: impl Into<String>, timestamp: f64) -> Self {
        Self { user_id: user_id.into(), text: text.into(), timestamp, trace_tag: TraceTag::Benign }
    }

    pub fn tagged(mut self, tag: TraceTag) -> Self {
        self.trace_tag = tag;
        self
    }
}

/// A retrieval hit. `noisy_score` is present only when the selection ran
/// under differentially private re-ranking; results are always sorted by
/// whichever score actually drove selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredChunk {
    pub chunk: Chunk,
    pub score: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noisy_score: Option<f64>,
}

/// Generator output. When the post-generation audit masks an answer the
/// text is replaced by the redaction sentinel and `masked` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedAnswer {
    pub text: String,
    pub masked: bool,
}

impl GeneratedAnswer {
    pub fn unmasked(text: impl Into<String>) -> Self {
        Self { text: text.into(), masked: false }
    }
}
