//! Exhaustive cosine vector index.
//!
//! The corpus is small enough (hundreds of documents) that exact search is
//! both affordable and preferable: defense effects stay attributable when
//! the baseline ranking has no approximation error. Reads are `&self` and
//! may proceed concurrently; mutation requires `&mut self`.

use std::collections::HashSet;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::types::{Chunk, EmbeddingVector, ScoredChunk};

pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Entry {
    chunk: Chunk,
    embedding: EmbeddingVector,
}

/// Persisted index format: header plus entries.
#[derive(Debug, Serialize, Deserialize)]
pub struct IndexSnapshot {
    pub version: u32,
    pub dimension: usize,
    pub count: usize,
    entries: Vec<Entry>,
}

#[derive(Debug, Clone)]
pub struct VectorIndex {
    dim: usize,
    entries: Vec<Entry>,
    keys: HashSet<(String, usize)>,
}

impl VectorIndex {
    pub fn new(dim: usize) -> Self {
        Self { dim, entries: Vec::new(), keys: HashSet::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Add one embedded chunk. Duplicate `(doc_id, chunk_index)` keys and
    /// dimension mismatches are rejected.
    pub fn add(&mut self, chunk: Chunk, embedding: EmbeddingVector) -> Result<(), CoreError> {
        if embedding.dim() != self.dim {
            return Err(CoreError::DimensionMismatch { expected: self.dim, got: embedding.dim() });
        }
        let key = (chunk.doc_id.clone(), chunk.chunk_index);
        if !self.keys.insert(key) {
            return Err(CoreError::DuplicateChunk {
                doc_id: chunk.doc_id,
                chunk_index: chunk.chunk_index,
            });
        }
        self.entries.push(Entry { chunk, embedding });
        Ok(())
    }

    /// Bulk add; returns the new index size.
    pub fn add_all(
        &mut self,
        items: impl IntoIterator<Item = (Chunk, EmbeddingVector)>,
    ) -> Result<usize, CoreError> {
        for (chunk, embedding) in items {
            self.add(chunk, embedding)?;
        }
        Ok(self.len())
    }

    /// Exact top-k by cosine similarity, descending, ties broken by
    /// ascending `(doc_id, chunk_index)`. Returns `min(k, len)` hits.
    pub fn search(&self, query: &EmbeddingVector, k: usize) -> Result<Vec<ScoredChunk>, CoreError> {
        if self.entries.is_empty() {
            return Err(CoreError::EmptyIndex);
        }
        if query.dim() != self.dim {
            return Err(CoreError::DimensionMismatch { expected: self.dim, got: query.dim() });
        }
        let mut scored: Vec<(f64, usize)> = self
            .entries
            .iter()
            .enumerate()
            .map(|(i, e)| (query.cosine(&e.embedding), i))
            .collect();
        let take = usize::min(k, scored.len());
        // Selection differs from the full-sort oracle used in tests: sort
        // only as far as the cut needs.
        scored.select_nth_unstable_by(take.saturating_sub(1), |a, b| self.rank_cmp(a, b));
        scored.truncate(take);
        scored.sort_unstable_by(|a, b| self.rank_cmp(a, b));
        Ok(scored
            .into_iter()
            .map(|(score, i)| ScoredChunk {
                chunk: self.entries[i].chunk.clone(),
                score,
                noisy_score: None,
            })
            .collect())
    }

    fn rank_cmp(&self, a: &(f64, usize), b: &(f64, usize)) -> std::cmp::Ordering {
        b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal).then_with(|| {
            let ca = &self.entries[a.1].chunk;
            let cb = &self.entries[b.1].chunk;
            (&ca.doc_id, ca.chunk_index).cmp(&(&cb.doc_id, cb.chunk_index))
        })
    }

    /// Embedding stored for `(doc_id, chunk_index)`, if present.
    pub fn embedding_of(&self, doc_id: &str, chunk_index: usize) -> Option<&EmbeddingVector> {
        self.entries
            .iter()
            .find(|e| e.chunk.doc_id == doc_id && e.chunk.chunk_index == chunk_index)
            .map(|e| &e.embedding)
    }

    pub fn snapshot(&self) -> IndexSnapshot {
        IndexSnapshot {
            version: SNAPSHOT_VERSION,
            dimension: self.dim,
            count: self.entries.len(),
            entries: self.entries.clone(),
        }
    }

    pub fn from_snapshot(snapshot: IndexSnapshot) -> Result<Self, CoreError> {
        if snapshot.version != SNAPSHOT_VERSION {
            return Err(CoreError::Snapshot(format!(
                "unsupported version {} (expected {})",
                snapshot.version, SNAPSHOT_VERSION
            )));
        }
        if snapshot.count != snapshot.entries.len() {
            return Err(CoreError::Snapshot(format!(
                "header count {} does not match {} entries",
                snapshot.count,
                snapshot.entries.len()
            )));
        }
        let mut index = VectorIndex::new(snapshot.dimension);
        for entry in snapshot.entries {
            index.add(entry.chunk, entry.embedding)?;
        }
        Ok(index)
    }

    pub fn save(&self, path: &Path) -> Result<(), CoreError> {
        let file = std::fs::File::create(path)?;
        serde_json::to_writer(BufWriter::new(file), &self.snapshot())
            .map_err(|e| CoreError::Snapshot(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CoreError> {
        let file = std::fs::File::open(path)?;
        let snapshot: IndexSnapshot = serde_json::from_reader(BufReader::new(file))
            .map_err(|e| CoreError::Snapshot(e.to_string()))?;
        Self::from_snapshot(snapshot)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chunk(doc: &str, idx: usize) -> Chunk {
        Chunk { doc_id: doc.into(), chunk_index: idx, token_span: (0, 1), text: doc.into() }
    }

    fn basis(dim: usize, at: usize) -> EmbeddingVector {
        let mut v = vec![0.0; dim];
        v[at] = 1.0;
        EmbeddingVector::normalized(v)
    }

    #[test]
    fn orthogonal_basis_retrieval() {
        let mut index = VectorIndex::new(2);
        index.add(chunk("d1", 0), basis(2, 0)).unwrap();
        index.add(chunk("d2", 0), basis(2, 1)).unwrap();
        let hits = index.search(&basis(2, 0), 1).unwrap();
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].chunk.doc_id, "d1");
        assert_eq!(hits[0].score, 1.0);

        let hits = index.search(&basis(2, 0), 2).unwrap();
        assert_eq!(hits[1].chunk.doc_id, "d2");
        assert_eq!(hits[1].score, 0.0);
    }

    #[test]
    fn duplicate_key_is_rejected() {
        let mut index = VectorIndex::new(2);
        index.add(chunk("d1", 0), basis(2, 0)).unwrap();
        let err = index.add(chunk("d1", 0), basis(2, 1)).unwrap_err();
        assert!(matches!(err, CoreError::DuplicateChunk { .. }));
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let mut index = VectorIndex::new(2);
        let err = index.add(chunk("d1", 0), basis(3, 0)).unwrap_err();
        assert!(matches!(err, CoreError::DimensionMismatch { .. }));
    }

    #[test]
    fn empty_index_search_fails() {
        let index = VectorIndex::new(2);
        assert!(matches!(index.search(&basis(2, 0), 1), Err(CoreError::EmptyIndex)));
    }

    #[test]
    fn adding_nothing_keeps_size() {
        let mut index = VectorIndex::new(2);
        let size = index.add_all(Vec::new()).unwrap();
        assert_eq!(size, 0);
    }

    #[test]
    fn tie_break_by_doc_id_then_chunk_index() {
        let mut index = VectorIndex::new(2);
        index.add(chunk("b", 0), basis(2, 0)).unwrap();
        index.add(chunk("a", 1), basis(2, 0)).unwrap();
        index.add(chunk("a", 0), basis(2, 0)).unwrap();
        let hits = index.search(&basis(2, 0), 3).unwrap();
        let keys: Vec<_> =
            hits.iter().map(|h| (h.chunk.doc_id.clone(), h.chunk.chunk_index)).collect();
        assert_eq!(keys, vec![("a".into(), 0), ("a".into(), 1), ("b".into(), 0)]);
    }

    #[test]
    fn snapshot_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("index.json");
        let mut index = VectorIndex::new(4);
        index.add(chunk("d1", 0), basis(4, 1)).unwrap();
        index.add(chunk("d1", 1), basis(4, 2)).unwrap();
        index.save(&path).unwrap();
        let loaded = VectorIndex::load(&path).unwrap();
        assert_eq!(loaded.len(), 2);
        assert_eq!(loaded.dim(), 4);
        let hits = loaded.search(&basis(4, 2), 1).unwrap();
        assert_eq!(hits[0].chunk.chunk_index, 1);
    }
}
