//! Clustering-based poisoning filter for the post-retrieval hook.
//!
//! Retrieved chunks are split with 2-means over their embeddings. If both
//! clusters are internally coherent (mean intra-cluster cosine at least
//! sigma) everything is kept; otherwise only the more coherent cluster
//! survives. A near-duplicate pass then compares survivors pairwise with
//! ROUGE-L and drops the less central member of any pair above rho.

use ragward_core::{Embedder, EmbeddingVector, ScoredChunk};

use crate::cluster::kmeans2;
use crate::config::DefenseError;
use crate::rouge::rouge_l;

const KMEANS_MAX_ITERS: usize = 100;

/// Mean pairwise cosine within a cluster; singletons count as fully
/// coherent.
fn coherence(embeddings: &[EmbeddingVector], members: &[usize]) -> f64 {
    if members.len() < 2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for (a, &i) in members.iter().enumerate() {
        for &j in &members[a + 1..] {
            sum += embeddings[i].cosine(&embeddings[j]);
            pairs += 1;
        }
    }
    sum / pairs as f64
}

/// Filter `retrieved` with the clustering + near-duplicate procedure.
/// Output is always a subset of the input, in the input's order. Inputs of
/// size <= 2 skip clustering and go straight to the duplicate pass.
pub fn trustrag_filter(
    retrieved: &[ScoredChunk],
    sigma: f64,
    rho: f64,
    embedder: &dyn Embedder,
) -> Result<Vec<ScoredChunk>, DefenseError> {
    if retrieved.is_empty() {
        return Ok(Vec::new());
    }
    let embeddings: Vec<EmbeddingVector> =
        retrieved.iter().map(|s| embedder.embed(&s.chunk.text)).collect();

    let mut live: Vec<usize> = (0..retrieved.len()).collect();
    if retrieved.len() > 2 {
        let (assignment, _) = kmeans2(&embeddings, KMEANS_MAX_ITERS)?;
        let cluster0: Vec<usize> =
            (0..retrieved.len()).filter(|&i| assignment[i] == 0).collect();
        let cluster1: Vec<usize> =
            (0..retrieved.len()).filter(|&i| assignment[i] == 1).collect();
        let s0 = coherence(&embeddings, &cluster0);
        let s1 = coherence(&embeddings, &cluster1);
        if s0.min(s1) < sigma {
            // Keep the more coherent cluster; ties keep cluster 0.
            live = if s0 >= s1 { cluster0 } else { cluster1 };
        }
    }

    // Near-duplicate pruning over the surviving set. Centrality c(d) is
    // each member's mean cosine to the other survivors, computed once
    // before the pair sweep.
    if live.len() > 1 {
        let centrality: Vec<f64> = live
            .iter()
            .map(|&i| {
                let others: Vec<f64> = live
                    .iter()
                    .filter(|&&j| j != i)
                    .map(|&j| embeddings[i].cosine(&embeddings[j]))
                    .collect();
                others.iter().sum::<f64>() / others.len() as f64
            })
            .collect();
        let mut removed = vec![false; live.len()];
        for a in 0..live.len() {
            for b in a + 1..live.len() {
                if removed[a] || removed[b] {
                    continue;
                }
                let (ca, cb) = (&retrieved[live[a]].chunk, &retrieved[live[b]].chunk);
                if rouge_l(&ca.text, &cb.text) > rho {
                    // Drop the less central member; ties drop the later one.
                    if centrality[a] < centrality[b] {
                        removed[a] = true;
                    } else {
                        removed[b] = true;
                    }
                }
            }
        }
        live = live
            .iter()
            .zip(&removed)
            .filter(|(_, &r)| !r)
            .map(|(&i, _)| i)
            .collect();
    }

    Ok(live.into_iter().map(|i| retrieved[i].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ragward_core::{Chunk, HashingEmbedder};

    fn sc(i: usize, text: &str, score: f64) -> ScoredChunk {
        ScoredChunk {
            chunk: Chunk {
                doc_id: format!("d{i}"),
                chunk_index: 0,
                token_span: (0, 1),
                text: text.to_string(),
            },
            score,
            noisy_score: None,
        }
    }

    #[test]
    fn empty_input_yields_empty_output() {
        let embedder = HashingEmbedder::new(384);
        assert!(trustrag_filter(&[], 0.88, 0.25, &embedder).unwrap().is_empty());
    }

    #[test]
    fn single_chunk_passes_through() {
        let embedder = HashingEmbedder::new(384);
        let input = vec![sc(0, "lone passage about topic", 0.9)];
        let out = trustrag_filter(&input, 0.88, 0.25, &embedder).unwrap();
        assert_eq!(out, input);
    }

    #[test]
    fn identical_pair_keeps_exactly_one() {
        let embedder = HashingEmbedder::new(384);
        let input = vec![
            sc(0, "the same exact text here", 0.9),
            sc(1, "the same exact text here", 0.8),
        ];
        let out = trustrag_filter(&input, 0.88, 0.25, &embedder).unwrap();
        // ROUGE-L = 1.0 > 0.25; equal centrality drops the later index.
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].chunk.doc_id, "d0");
    }

    #[test]
    fn incoherent_offtopic_cluster_is_removed() {
        let embedder = HashingEmbedder::new(384);
        // Four near-duplicate clean chunks (pairwise cosine ~0.9) and two
        // off-topic poisons that share half their vocabulary with each
        // other and nothing with the cleans: the poison pair clusters
        // together but its coherence (~0.5) stays far below sigma.
        let clean_base = "solar panels convert sunlight into electric power for homes";
        let input = vec![
            sc(0, &format!("{clean_base} reliably"), 0.95),
            sc(1, &format!("{clean_base} cheaply"), 0.94),
            sc(2, &format!("{clean_base} quietly"), 0.93),
            sc(3, &format!("{clean_base} everywhere"), 0.92),
            sc(4, "zulu xray quebec victor whiskey tango uniform sierra", 0.5),
            sc(5, "zulu xray quebec victor kilo lima mike november", 0.4),
        ];
        let embeddings: Vec<EmbeddingVector> =
            input.iter().map(|s| embedder.embed(&s.chunk.text)).collect();
        // Direct computation of the construction's cluster coherences.
        let clean_coherence = coherence(&embeddings, &[0, 1, 2, 3]);
        let poison_coherence = coherence(&embeddings, &[4, 5]);
        assert!(clean_coherence > 0.85, "clean coherence {clean_coherence}");
        assert!(poison_coherence < 0.6, "poison coherence {poison_coherence}");
        assert!(poison_coherence < clean_coherence);
        // Poisons must be mutually closer than to any clean chunk so the
        // deterministic seeding separates the two groups.
        for i in [4usize, 5] {
            for j in 0..4 {
                assert!(embeddings[4].cosine(&embeddings[5]) > embeddings[i].cosine(&embeddings[j]));
            }
        }

        let out = trustrag_filter(&input, 0.88, 0.25, &embedder).unwrap();
        assert!(!out.is_empty());
        for s in &out {
            assert!(
                ["d0", "d1", "d2", "d3"].contains(&s.chunk.doc_id.as_str()),
                "poison {} survived",
                s.chunk.doc_id
            );
        }
    }

    #[test]
    fn output_preserves_input_order() {
        let embedder = HashingEmbedder::new(384);
        let input = vec![
            sc(0, "alpha topic sentence one", 0.9),
            sc(1, "totally different subject matter", 0.8),
            sc(2, "alpha topic sentence two", 0.7),
        ];
        let out = trustrag_filter(&input, 0.88, 0.25, &embedder).unwrap();
        let positions: Vec<usize> = out
            .iter()
            .map(|s| input.iter().position(|i| i.chunk == s.chunk).unwrap())
            .collect();
        let mut sorted = positions.clone();
        sorted.sort_unstable();
        assert_eq!(positions, sorted);
    }
}
