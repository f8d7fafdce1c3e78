//! Corpus ingestion file format: JSON Lines, one document per line with
//! fields `id`, `text` and optional `is_poison`.

use std::collections::HashSet;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::CoreError;
use crate::types::Document;

/// Load and validate a JSONL corpus. Blank lines are ignored; malformed
/// lines, empty texts and duplicate ids are reported with their line
/// number.
pub fn load_corpus_jsonl(path: &Path) -> Result<Vec<Document>, CoreError> {
    let file = std::fs::File::open(path)?;
    let mut docs = Vec::new();
    let mut seen = HashSet::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: Document = serde_json::from_str(&line).map_err(|e| CoreError::CorpusFormat {
            line: lineno + 1,
            message: e.to_string(),
        })?;
        if doc.text.is_empty() {
            return Err(CoreError::CorpusFormat {
                line: lineno + 1,
                message: format!("document {} has empty text", doc.id),
            });
        }
        if !seen.insert(doc.id.clone()) {
            return Err(CoreError::CorpusFormat {
                line: lineno + 1,
                message: format!("duplicate document id {}", doc.id),
            });
        }
        docs.push(doc);
    }
    Ok(docs)
}

pub fn write_corpus_jsonl(path: &Path, docs: &[Document]) -> Result<(), CoreError> {
    let mut file = std::fs::File::create(path)?;
    for doc in docs {
        serde_json::to_writer(&mut file, doc).map_err(|e| CoreError::CorpusFormat {
            line: 0,
            message: e.to_string(),
        })?;
        file.write_all(b"\n")?;
    }
    Ok(())
}
