//! Word-level tokenizer used everywhere token positions matter.
//!
//! Tokens are maximal runs of alphanumeric characters, lowercased; every
//! other character (whitespace and punctuation alike) is a separator. The
//! same rule drives chunking, embedding, similarity metrics and audits, so
//! token offsets agree across the whole pipeline.

/// A token plus the byte range it occupies in the source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSpan {
    pub token: String,
    pub start: usize,
    pub end: usize,
}

/// Tokenize keeping byte offsets into the original text.
pub fn tokenize_spans(text: &str) -> Vec<TokenSpan> {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut start = 0usize;
    for (idx, ch) in text.char_indices() {
        if ch.is_alphanumeric() {
            if current.is_empty() {
                start = idx;
            }
            current.extend(ch.to_lowercase());
        } else if !current.is_empty() {
            out.push(TokenSpan { token: std::mem::take(&mut current), start, end: idx });
        }
    }
    if !current.is_empty() {
        out.push(TokenSpan { token: current, start, end: text.len() });
    }
    out
}

/// Lowercased word tokens of `text`. Empty input yields an empty sequence.
pub fn tokenize(text: &str) -> Vec<String> {
    tokenize_spans(text).into_iter().map(|s| s.token).collect()
}

/// Split `text` into sentences on `.`, `!` and `?` terminators. Segments
/// without any token are dropped.
pub fn sentences(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current = String::new();
    for ch in text.chars() {
        current.push(ch);
        if matches!(ch, '.' | '!' | '?') {
            push_sentence(&mut out, &mut current);
        }
    }
    push_sentence(&mut out, &mut current);
    out
}

fn push_sentence(out: &mut Vec<String>, current: &mut String) {
    let trimmed = current.trim();
    if !trimmed.is_empty() && !tokenize(trimmed).is_empty() {
        out.push(trimmed.to_string());
    }
    current.clear();
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_yields_no_tokens() {
        assert!(tokenize("").is_empty());
    }

    #[test]
    fn punctuation_splits_and_lowercases() {
        assert_eq!(tokenize("What is DP-RAG?"), vec!["what", "is", "dp", "rag"]);
    }

    #[test]
    fn whitespace_collapse_preserves_duplicates() {
        assert_eq!(tokenize("a  a"), vec!["a", "a"]);
    }

    #[test]
    fn spans_index_original_bytes() {
        let spans = tokenize_spans("Ab, cd");
        assert_eq!(spans.len(), 2);
        assert_eq!((spans[0].start, spans[0].end), (0, 2));
        assert_eq!((spans[1].start, spans[1].end), (4, 6));
        assert_eq!(spans[0].token, "ab");
    }

    #[test]
    fn sentence_split_keeps_terminators() {
        let s = sentences("Paris is big. Berlin? Yes!");
        assert_eq!(s, vec!["Paris is big.", "Berlin?", "Yes!"]);
    }

    #[test]
    fn sentence_without_tokens_is_dropped() {
        assert!(sentences("... !!").is_empty());
    }

    #[test]
    fn trailing_text_is_a_sentence() {
        assert_eq!(sentences("no terminator here"), vec!["no terminator here"]);
    }
}
