//! Byte-stable prompt assembly.
//!
//! Block headers carry byte lengths so the rendered prompt decodes
//! unambiguously: distinct (query, ordered context texts) pairs always
//! render to distinct bytes, whatever the strings contain.

use crate::generate::PromptParts;
use crate::types::{Query, ScoredChunk};

/// Render the augmented prompt: system block, numbered context blocks in
/// retrieval order, then the query.
pub fn augment_prompt(query: &Query, context: &[ScoredChunk], system_instructions: &str) -> String {
    let parts = PromptParts {
        system: system_instructions.to_string(),
        query: query.text.clone(),
        context: context.iter().map(|c| c.chunk.text.clone()).collect(),
    };
    render_prompt(&parts)
}

pub fn render_prompt(parts: &PromptParts) -> String {
    let mut out = String::new();
    out.push_str(&format!("[SYSTEM {}B]\n{}\n", parts.system.len(), parts.system));
    for (i, text) in parts.context.iter().enumerate() {
        out.push_str(&format!(
            "[CONTEXT {}/{} {}B]\n{}\n",
            i + 1,
            parts.context.len(),
            text.len(),
            text
        ));
    }
    out.push_str(&format!("[QUERY {}B]\n{}\n", parts.query.len(), parts.query));
    out
}
