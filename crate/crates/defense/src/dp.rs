//! Differentially private retrieval.
//!
//! The Laplace mechanism is applied to query-document similarity scores
//! between encoding and final top-k selection. Cosine scores live in
//! [-1, 1], so a single document changes a score by at most 2; noise is
//! drawn with scale `2 / epsilon`. Only an oversampled candidate pool of
//! `multiplier * k` exact hits receives noise, which bounds cost while
//! leaving the released ranking noisy.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ragward_core::{EmbeddingVector, ScoredChunk, VectorIndex};

use crate::config::DefenseError;

/// Score sensitivity for cosine similarities in [-1, 1].
const SENSITIVITY: f64 = 2.0;

/// Sample Laplace(0, scale) by inverse CDF from one uniform draw.
fn laplace(rng: &mut ChaCha8Rng, scale: f64) -> f64 {
    let mut u: f64 = rng.gen::<f64>() - 0.5;
    if u == -0.5 {
        u = -0.5 + f64::EPSILON;
    }
    -scale * u.signum() * (1.0 - 2.0 * u.abs()).ln()
}

/// Noisy top-k: fetch `multiplier * k` exact candidates, perturb each
/// candidate's score with Laplace noise of scale `2 / epsilon`, re-rank by
/// noisy score and release the top k. Fully reproducible from `rng_seed`.
pub fn dp_retrieve(
    index: &VectorIndex,
    query_vec: &EmbeddingVector,
    k: usize,
    epsilon: f64,
    multiplier: usize,
    rng_seed: u64,
) -> Result<Vec<ScoredChunk>, DefenseError> {
    let pool = k.saturating_mul(multiplier).max(k);
    let mut candidates = index.search(query_vec, pool)?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let scale = SENSITIVITY / epsilon;
    // Candidates arrive in deterministic exact-rank order, so the seed
    // fixes which noise lands on which candidate.
    for candidate in &mut candidates {
        candidate.noisy_score = Some(candidate.score + laplace(&mut rng, scale));
    }
    candidates.sort_by(|a, b| {
        b.noisy_score
            .unwrap()
            .partial_cmp(&a.noisy_score.unwrap())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| {
                (&a.chunk.doc_id, a.chunk.chunk_index).cmp(&(&b.chunk.doc_id, b.chunk.chunk_index))
            })
    });
    candidates.truncate(k.min(candidates.len()));
    Ok(candidates)
}
