//! The assembled pipeline: ingest, retrieve, augment, generate.

use std::sync::Arc;

use crate::chunk::chunk_document;
use crate::embed::{Embedder, HashingEmbedder};
use crate::error::CoreError;
use crate::generate::{generate_or_refuse, Generator, PromptParts};
use crate::index::VectorIndex;
use crate::types::{Document, EmbeddingVector, GeneratedAnswer, ScoredChunk};

pub const DEFAULT_SYSTEM_PROMPT: &str =
    "Answer the user query using only the provided context passages.";

/// One undefended pipeline run: the retrieved context and the answer.
#[derive(Debug, Clone)]
pub struct EngineOutput {
    pub context: Vec<ScoredChunk>,
    pub answer: GeneratedAnswer,
}

/// Minimal deterministic RAG engine. One instance serves many queries;
/// retrieval is read-only, ingestion takes `&mut self`.
pub struct RagEngine {
    embedder: HashingEmbedder,
    index: VectorIndex,
    generator: Arc<dyn Generator>,
    pub top_k: usize,
    pub chunk_size: usize,
    pub chunk_overlap: usize,
    pub system_prompt: String,
}

impl RagEngine {
    pub fn new(
        dim: usize,
        chunk_size: usize,
        chunk_overlap: usize,
        top_k: usize,
        generator: Arc<dyn Generator>,
    ) -> Self {
        Self {
            embedder: HashingEmbedder::new(dim),
            index: VectorIndex::new(dim),
            generator,
            top_k,
            chunk_size,
            chunk_overlap,
            system_prompt: DEFAULT_SYSTEM_PROMPT.to_string(),
        }
    }

    pub fn embedder(&self) -> &HashingEmbedder {
        &self.embedder
    }

    pub fn index(&self) -> &VectorIndex {
        &self.index
    }

    pub fn generator(&self) -> &dyn Generator {
        self.generator.as_ref()
    }

    pub fn set_index(&mut self, index: VectorIndex) {
        self.index = index;
    }

    /// Chunk, embed and index `docs`. Returns the number of chunks added.
    pub fn ingest_documents(&mut self, docs: &[Document]) -> Result<usize, CoreError> {
        let mut added = 0usize;
        for doc in docs {
            if doc.text.is_empty() {
                return Err(CoreError::EmptyDocument(doc.id.clone()));
            }
            for chunk in chunk_document(doc, self.chunk_size, self.chunk_overlap)? {
                let embedding = self.embedder.embed(&chunk.text);
                self.index.add(chunk, embedding)?;
                added += 1;
            }
        }
        Ok(added)
    }

    pub fn embed_query(&self, text: &str) -> EmbeddingVector {
        self.embedder.embed(text)
    }

    /// Exact top-k retrieval for `query_text`.
    pub fn retrieve(&self, query_text: &str) -> Result<Vec<ScoredChunk>, CoreError> {
        self.index.search(&self.embed_query(query_text), self.top_k)
    }

    /// Generate an answer for `query_text` over `context`, falling back to
    /// a refusal on backend failure.
    pub fn generate(&self, query_text: &str, context: &[ScoredChunk]) -> GeneratedAnswer {
        self.generate_with_system(query_text, context, &self.system_prompt)
    }

    pub fn generate_with_system(
        &self,
        query_text: &str,
        context: &[ScoredChunk],
        system: &str,
    ) -> GeneratedAnswer {
        let parts = PromptParts {
            system: system.to_string(),
            query: query_text.to_string(),
            context: context.iter().map(|c| c.chunk.text.clone()).collect(),
        };
        generate_or_refuse(self.generator.as_ref(), &parts)
    }

    /// The undefended query path: retrieve then generate.
    pub fn answer(&self, query_text: &str) -> Result<EngineOutput, CoreError> {
        let context = self.retrieve(query_text)?;
        let answer = self.generate(query_text, &context);
        Ok(EngineOutput { context, answer })
    }
}
