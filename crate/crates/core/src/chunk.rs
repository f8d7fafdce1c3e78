//! Sliding-window document chunking.

use crate::error::CoreError;
use crate::tokenize::tokenize_spans;
use crate::types::{Chunk, Document};

/// Split `doc` into token windows of `chunk_size` tokens advancing by
/// `chunk_size - chunk_overlap`. The final window may be shorter; chunking
/// stops once a window reaches the end of the document. Chunk text is the
/// original byte slice covering the window, so casing and punctuation
/// survive for downstream sentence extraction and audits.
pub fn chunk_document(
    doc: &Document,
    chunk_size: usize,
    chunk_overlap: usize,
) -> Result<Vec<Chunk>, CoreError> {
    if chunk_overlap >= chunk_size {
        return Err(CoreError::InvalidChunking { size: chunk_size, overlap: chunk_overlap });
    }
    let spans = tokenize_spans(&doc.text);
    let total = spans.len();
    let stride = chunk_size - chunk_overlap;
    let mut chunks = Vec::new();
    let mut start = 0usize;
    while start < total {
        let end = usize::min(start + chunk_size, total);
        chunks.push(Chunk {
            doc_id: doc.id.clone(),
            chunk_index: chunks.len(),
            token_span: (start, end),
            text: doc.text[spans[start].start..spans[end - 1].end].to_string(),
        });
        if end == total {
            break;
        }
        start += stride;
    }
    Ok(chunks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc_of_tokens(n: usize) -> Document {
        let text = (0..n).map(|i| format!("w{i}")).collect::<Vec<_>>().join(" ");
        Document::new("d", text)
    }

    #[test]
    fn short_document_is_one_chunk() {
        let chunks = chunk_document(&doc_of_tokens(300), 512, 50).unwrap();
        assert_eq!(chunks.len(), 1);
        assert_eq!(chunks[0].token_span, (0, 300));
    }

    #[test]
    fn thousand_token_document_tiles_with_stride_462() {
        let chunks = chunk_document(&doc_of_tokens(1000), 512, 50).unwrap();
        let spans: Vec<_> = chunks.iter().map(|c| c.token_span).collect();
        assert_eq!(spans, vec![(0, 512), (462, 974), (924, 1000)]);
    }

    #[test]
    fn exact_window_is_one_chunk() {
        let chunks = chunk_document(&doc_of_tokens(512), 512, 50).unwrap();
        assert_eq!(chunks.len(), 1);
        assert_eq!(chunks[0].token_span, (0, 512));
    }

    #[test]
    fn overlap_must_be_smaller_than_size() {
        let err = chunk_document(&doc_of_tokens(10), 50, 50).unwrap_err();
        assert!(matches!(err, CoreError::InvalidChunking { .. }));
    }

    #[test]
    fn chunk_indices_are_consecutive() {
        let chunks = chunk_document(&doc_of_tokens(2000), 512, 50).unwrap();
        for (i, c) in chunks.iter().enumerate() {
            assert_eq!(c.chunk_index, i);
        }
    }

    #[test]
    fn tokenless_document_yields_no_chunks() {
        let doc = Document::new("d", "?!.");
        assert!(chunk_document(&doc, 512, 50).unwrap().is_empty());
    }

    #[test]
    fn chunk_text_preserves_original_bytes() {
        let doc = Document::new("d", "Alpha beta. Gamma!");
        let chunks = chunk_document(&doc, 2, 1).unwrap();
        assert_eq!(chunks[0].text, "Alpha beta");
        assert_eq!(chunks[1].text, "beta. Gamma");
    }
}
