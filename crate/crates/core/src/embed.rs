//! Feature-hashing bag-of-tokens embedder.
//!
//! Each token is hashed with 64-bit FNV-1a; the low bits pick a bucket in
//! `[0, dim)` and the top bit picks a sign. Counts accumulate per bucket
//! and the result is L2-normalized. The construction is fully
//! deterministic: the same text always produces bitwise-identical vectors,
//! which is what makes noisy retrieval and defense effects attributable.

use crate::tokenize::tokenize;
use crate::types::EmbeddingVector;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// Stable 64-bit FNV-1a hash of `bytes`.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = FNV_OFFSET;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

/// Text embedder contract. Implementations must be shareable across
/// concurrent query pipelines.
pub trait Embedder: Send + Sync {
    fn dim(&self) -> usize;
    fn embed(&self, text: &str) -> EmbeddingVector;
}

/// The reference embedder.
#[derive(Debug, Clone)]
pub struct HashingEmbedder {
    dim: usize,
}

impl HashingEmbedder {
    /// `dim` must be at least 2.
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 2, "embedding dimension must be >= 2");
        Self { dim }
    }

    /// Bucket and sign assigned to a token; exposed so tests can construct
    /// collision-free token sets.
    pub fn bucket_of(&self, token: &str) -> (usize, f64) {
        let h = fnv1a64(token.as_bytes());
        let bucket = (h % self.dim as u64) as usize;
        let sign = if h >> 63 == 0 { 1.0 } else { -1.0 };
        (bucket, sign)
    }
}

impl Embedder for HashingEmbedder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, text: &str) -> EmbeddingVector {
        let mut values = vec![0.0f64; self.dim];
        for token in tokenize(text) {
            let (bucket, sign) = self.bucket_of(&token);
            values[bucket] += sign;
        }
        EmbeddingVector::normalized(values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedding_is_deterministic() {
        let e = HashingEmbedder::new(384);
        let a = e.embed("some moderately long query text");
        let b = e.embed("some moderately long query text");
        assert_eq!(a, b);
    }

    #[test]
    fn disjoint_tokens_without_collisions_are_orthogonal() {
        let e = HashingEmbedder::new(1024);
        let (b1, _) = e.bucket_of("alpha");
        let (b2, _) = e.bucket_of("bravo");
        let (b3, _) = e.bucket_of("kilo");
        let (b4, _) = e.bucket_of("lima");
        let buckets = [b1, b2, b3, b4];
        for i in 0..4 {
            for j in i + 1..4 {
                assert_ne!(buckets[i], buckets[j], "fixture tokens must not collide");
            }
        }
        let a = e.embed("alpha bravo");
        let b = e.embed("kilo lima");
        assert_eq!(a.cosine(&b), 0.0);
    }

    #[test]
    fn repetition_scales_out_under_normalization() {
        let e = HashingEmbedder::new(64);
        let a = e.embed("a a");
        let b = e.embed("a");
        assert!((a.cosine(&b) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tokenless_text_embeds_to_basis_vector() {
        let e = HashingEmbedder::new(8);
        let v = e.embed("!!!");
        assert_eq!(v.values[0], 1.0);
    }

    #[test]
    fn unit_norm_invariant() {
        let e = HashingEmbedder::new(384);
        let v = e.embed("the quick brown fox jumps over the lazy dog");
        let norm: f64 = v.values.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-9);
    }
}
