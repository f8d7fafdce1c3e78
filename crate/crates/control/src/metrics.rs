//! Heuristic indicators anchoring the sentinel's assessment.
//!
//! Pre-retrieval metrics look only at the query and the user's recent
//! history; retrieval metrics look at the vector-space shape of the
//! retrieved set. All are cheap enough to run on every query.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use ragward_core::{tokenize, Embedder, Query, ScoredChunk};

use crate::trust::TrustRecord;

/// Ceiling for intent velocity; also the value used when consecutive
/// queries share a timestamp.
pub const VELOCITY_CAP: f64 = 100.0;

/// Query-analysis metrics computed before retrieval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreMetrics {
    /// Max Jaccard similarity between this query's token set and any
    /// recent query from the same user. High overlap suggests calibrated
    /// probing.
    pub lexical_overlap: f64,
    /// Ratio of non-alphanumeric characters to total characters.
    pub complexity: f64,
    /// Inverse seconds since the user's previous query, capped at
    /// [`VELOCITY_CAP`]; 0 for a first query.
    pub intent_velocity: f64,
}

/// Vector-space metrics computed over the retrieved set; both are 0 when
/// fewer than two items were retrieved.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PostMetrics {
    /// 1 minus the mean pairwise cosine among retrieved embeddings,
    /// clamped to [0, 1].
    pub vector_dispersion: f64,
    /// Similarity score of the top-1 hit minus the top-k hit, clamped to
    /// [0, 2].
    pub score_dropoff: f64,
}

fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    let inter = a.intersection(b).count() as f64;
    let union = a.union(b).count() as f64;
    inter / union
}

pub fn compute_pre_metrics(query: &Query, history: &TrustRecord) -> PreMetrics {
    let tokens: BTreeSet<String> = tokenize(&query.text).into_iter().collect();
    let lexical_overlap = history
        .history
        .iter()
        .map(|h| jaccard(&tokens, &tokenize(&h.query_text).into_iter().collect()))
        .fold(0.0, f64::max);

    let total = query.text.chars().count();
    let complexity = if total == 0 {
        0.0
    } else {
        query.text.chars().filter(|c| !c.is_alphanumeric()).count() as f64 / total as f64
    };

    let intent_velocity = match history.history.back() {
        None => 0.0,
        Some(last) => {
            let dt = query.timestamp - last.timestamp;
            if dt <= 0.0 {
                VELOCITY_CAP
            } else {
                (1.0 / dt).min(VELOCITY_CAP)
            }
        }
    };

    PreMetrics { lexical_overlap, complexity, intent_velocity }
}

pub fn compute_post_metrics(retrieved: &[ScoredChunk], embedder: &dyn Embedder) -> PostMetrics {
    if retrieved.len() < 2 {
        return PostMetrics { vector_dispersion: 0.0, score_dropoff: 0.0 };
    }
    let embeddings: Vec<_> = retrieved.iter().map(|s| embedder.embed(&s.chunk.text)).collect();
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for i in 0..embeddings.len() {
        for j in i + 1..embeddings.len() {
            sum += embeddings[i].cosine(&embeddings[j]);
            pairs += 1;
        }
    }
    let vector_dispersion = (1.0 - sum / pairs as f64).clamp(0.0, 1.0);
    let score_dropoff =
        (retrieved[0].score - retrieved[retrieved.len() - 1].score).clamp(0.0, 2.0);
    PostMetrics { vector_dispersion, score_dropoff }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ragward_core::{Chunk, HashingEmbedder};

    fn record_with_queries(entries: &[(&str, f64)]) -> TrustRecord {
        let mut record = TrustRecord::new("u");
        for (text, ts) in entries {
            record.push_interaction(crate::trust::InteractionRecord {
                query_text: text.to_string(),
                timestamp: *ts,
                defenses_fired: Vec::new(),
                context_pruned: false,
                output_masked: false,
            });
        }
        record
    }

    #[test]
    fn first_query_has_zero_overlap_and_velocity() {
        let record = TrustRecord::new("u");
        let q = Query::new("u", "what is x", 100.0);
        let m = compute_pre_metrics(&q, &record);
        assert_eq!(m.lexical_overlap, 0.0);
        assert_eq!(m.intent_velocity, 0.0);
    }

    #[test]
    fn jaccard_overlap_against_history() {
        // {what, is, x} vs {what, is, y}: 2 shared of 4 total.
        let record = record_with_queries(&[("what is y", 10.0)]);
        let q = Query::new("u", "what is x", 20.0);
        let m = compute_pre_metrics(&q, &record);
        assert!((m.lexical_overlap - 0.5).abs() < 1e-12);
    }

    #[test]
    fn complexity_counts_non_alphanumeric_chars() {
        let record = TrustRecord::new("u");
        let q = Query::new("u", "ab?!", 0.0);
        let m = compute_pre_metrics(&q, &record);
        assert!((m.complexity - 0.5).abs() < 1e-12);
    }

    #[test]
    fn empty_text_has_zero_complexity() {
        let record = TrustRecord::new("u");
        let q = Query::new("u", "", 0.0);
        assert_eq!(compute_pre_metrics(&q, &record).complexity, 0.0);
    }

    #[test]
    fn velocity_is_inverse_gap_with_cap() {
        let record = record_with_queries(&[("q", 100.0)]);
        let m = compute_pre_metrics(&Query::new("u", "next", 102.0), &record);
        assert!((m.intent_velocity - 0.5).abs() < 1e-12);

        let m = compute_pre_metrics(&Query::new("u", "next", 100.0), &record);
        assert_eq!(m.intent_velocity, VELOCITY_CAP);

        let m = compute_pre_metrics(&Query::new("u", "next", 100.0001), &record);
        assert_eq!(m.intent_velocity, VELOCITY_CAP);
    }

    fn sc(text: &str, score: f64) -> ScoredChunk {
        ScoredChunk {
            chunk: Chunk {
                doc_id: "d".into(),
                chunk_index: 0,
                token_span: (0, 1),
                text: text.to_string(),
            },
            score,
            noisy_score: None,
        }
    }

    #[test]
    fn identical_embeddings_have_zero_dispersion() {
        let embedder = HashingEmbedder::new(384);
        let retrieved = vec![sc("same text", 0.9), sc("same text", 0.8)];
        let m = compute_post_metrics(&retrieved, &embedder);
        assert!(m.vector_dispersion.abs() < 1e-9);
    }

    #[test]
    fn orthogonal_embeddings_have_full_dispersion() {
        let embedder = HashingEmbedder::new(1024);
        let retrieved = vec![sc("alpha bravo", 0.9), sc("kilo lima", 0.3)];
        let m = compute_post_metrics(&retrieved, &embedder);
        assert!((m.vector_dispersion - 1.0).abs() < 1e-9);
    }

    #[test]
    fn dropoff_is_top1_minus_topk() {
        let embedder = HashingEmbedder::new(384);
        let retrieved = vec![
            sc("a", 0.9),
            sc("b", 0.8),
            sc("c", 0.7),
            sc("d", 0.5),
            sc("e", 0.4),
        ];
        let m = compute_post_metrics(&retrieved, &embedder);
        assert!((m.score_dropoff - 0.5).abs() < 1e-12);
    }

    #[test]
    fn fewer_than_two_items_give_zero_metrics() {
        let embedder = HashingEmbedder::new(384);
        let m = compute_post_metrics(&[sc("only", 0.9)], &embedder);
        assert_eq!(m.vector_dispersion, 0.0);
        assert_eq!(m.score_dropoff, 0.0);
    }
}
