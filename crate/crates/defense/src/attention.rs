//! Attention proxy and variance-based context pruning.
//!
//! The pruning loop needs a per-passage attention signal but generator
//! internals are not available here, so the reference proxy is a
//! temperature softmax over query-passage cosine similarity, scaled to
//! percentage points. The provider is pluggable: anything producing an
//! [`AttentionDistribution`] can drive the same pruning loop.

use serde::{Deserialize, Serialize};

use ragward_core::{Embedder, EmbeddingVector, ScoredChunk};

use crate::config::DefenseError;

/// Softmax temperature sharp enough that one dominant passage is visible
/// in the weights.
pub const DEFAULT_TEMPERATURE: f64 = 0.05;

/// Attention weights in percentage points; they sum to 100.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttentionDistribution {
    pub weights: Vec<f64>,
}

impl AttentionDistribution {
    /// Population variance of the weights, in (pp)^2.
    pub fn variance(&self) -> f64 {
        let n = self.weights.len() as f64;
        let mean = self.weights.iter().sum::<f64>() / n;
        self.weights.iter().map(|w| (w - mean) * (w - mean)).sum::<f64>() / n
    }

    /// Index of the largest weight; ties resolve to the lowest index.
    pub fn argmax(&self) -> usize {
        let mut best = 0usize;
        for (i, w) in self.weights.iter().enumerate() {
            if *w > self.weights[best] {
                best = i;
            }
        }
        best
    }
}

/// Softmax of `cosine(query, chunk) / temperature` over the context,
/// scaled by 100.
pub fn attention_proxy(
    query_vec: &EmbeddingVector,
    context: &[ScoredChunk],
    temperature: f64,
    embedder: &dyn Embedder,
) -> Result<AttentionDistribution, DefenseError> {
    if context.is_empty() {
        return Err(DefenseError::EmptyContext);
    }
    let logits: Vec<f64> = context
        .iter()
        .map(|s| query_vec.cosine(&embedder.embed(&s.chunk.text)) / temperature)
        .collect();
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    Ok(AttentionDistribution { weights: exps.into_iter().map(|e| 100.0 * e / sum).collect() })
}

/// Iteratively drop the passage with the highest attention weight while
/// the weight variance exceeds `threshold`, up to `max_removals` rounds.
/// Attention is recomputed over the survivors each round. The set is never
/// emptied: pruning stops when one passage remains. Survivors keep their
/// input order.
pub fn av_prune(
    context: &[ScoredChunk],
    query_vec: &EmbeddingVector,
    max_removals: usize,
    threshold: f64,
    embedder: &dyn Embedder,
) -> Result<Vec<ScoredChunk>, DefenseError> {
    let mut survivors: Vec<ScoredChunk> = context.to_vec();
    for _ in 0..max_removals {
        if survivors.len() <= 1 {
            break;
        }
        let attention =
            attention_proxy(query_vec, &survivors, DEFAULT_TEMPERATURE, embedder)?;
        if attention.variance() <= threshold {
            break;
        }
        survivors.remove(attention.argmax());
    }
    Ok(survivors)
}
