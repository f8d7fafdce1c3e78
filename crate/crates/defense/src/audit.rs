//! Post-generation output audit.
//!
//! The audit flags verbatim reproduction of retrieved context: if any
//! contiguous n-token window of the answer also appears as a contiguous
//! token run inside any single context chunk, the answer is replaced by
//! the redaction sentinel and marked masked.

use ragward_core::{tokenize, GeneratedAnswer, ScoredChunk};

/// Text substituted for masked answers.
pub const REDACTION_SENTINEL: &str = "[OUTPUT REDACTED]";

fn contains_run(haystack: &[String], needle: &[String]) -> bool {
    haystack.windows(needle.len()).any(|w| w == needle)
}

/// Audit `answer` against `context` with n-gram length `n`.
pub fn audit_output(
    answer: GeneratedAnswer,
    context: &[ScoredChunk],
    n: usize,
) -> GeneratedAnswer {
    if answer.masked {
        return answer;
    }
    let answer_tokens = tokenize(&answer.text);
    if answer_tokens.len() < n {
        return answer;
    }
    let chunk_tokens: Vec<Vec<String>> =
        context.iter().map(|s| tokenize(&s.chunk.text)).collect();
    for window in answer_tokens.windows(n) {
        if chunk_tokens.iter().any(|tokens| contains_run(tokens, window)) {
            return GeneratedAnswer { text: REDACTION_SENTINEL.to_string(), masked: true };
        }
    }
    answer
}

#[cfg(test)]
mod tests {
    use super::*;
    use ragward_core::Chunk;

    fn sc(text: &str) -> ScoredChunk {
        ScoredChunk {
            chunk: Chunk {
                doc_id: "d".into(),
                chunk_index: 0,
                token_span: (0, 1),
                text: text.to_string(),
            },
            score: 0.0,
            noisy_score: None,
        }
    }

    const LONG: &str = "one two three four five six seven eight nine ten";

    #[test]
    fn echoed_context_is_masked() {
        let answer = GeneratedAnswer::unmasked(LONG);
        let out = audit_output(answer, &[sc(LONG)], 8);
        assert!(out.masked);
        assert_eq!(out.text, REDACTION_SENTINEL);
    }

    #[test]
    fn short_overlap_passes() {
        let answer = GeneratedAnswer::unmasked("one two three and something else entirely now");
        let out = audit_output(answer.clone(), &[sc(LONG)], 8);
        assert!(!out.masked);
        assert_eq!(out.text, answer.text);
    }

    #[test]
    fn seven_token_answer_never_forms_a_window() {
        let answer = GeneratedAnswer::unmasked("one two three four five six seven");
        let out = audit_output(answer, &[sc("one two three four five six seven")], 8);
        assert!(!out.masked);
    }

    #[test]
    fn window_must_sit_inside_a_single_chunk() {
        // The answer's 8-gram spans the two chunks, never one of them.
        let answer = GeneratedAnswer::unmasked("one two three four alpha beta gamma delta");
        let context = vec![sc("one two three four"), sc("alpha beta gamma delta")];
        let out = audit_output(answer, &context, 8);
        assert!(!out.masked);
    }

    #[test]
    fn case_and_punctuation_do_not_defeat_the_audit() {
        let answer = GeneratedAnswer::unmasked("One, two THREE four; five six SEVEN eight!");
        let out = audit_output(answer, &[sc(LONG)], 8);
        assert!(out.masked);
    }
}
