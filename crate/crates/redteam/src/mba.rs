//! Mask-fill membership probes.
//!
//! A probe takes a candidate document, masks its rarest tokens and asks
//! the system to reconstruct them; exact reconstruction of every mask is
//! the membership signal. Mask selection uses corpus token frequency
//! through a pluggable scorer (lowest score masked first), so a model-based
//! likelihood scorer can replace the default without touching the probe
//! machinery.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use ragward_core::tokenize::{tokenize_spans, TokenSpan};
use ragward_core::{tokenize, Document, GeneratedAnswer};

pub const DEFAULT_MEMBER_COUNT: usize = 30;
pub const DEFAULT_NONMEMBER_COUNT: usize = 20;
pub const DEFAULT_MASKS: usize = 5;

/// Instruction appended to the masked document to form the probe query.
pub const MASK_FILL_INSTRUCTION: &str =
    "Fill in each masked token exactly as it appears in the source. Respond with lines MASK_i = token.";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MbaProbe {
    pub target_doc_id: String,
    /// Document text with the selected tokens replaced by `[MASK_i]`
    /// placeholders, numbered left to right from 1.
    pub masked_text: String,
    /// The masked tokens in placeholder order, lowercased.
    pub ground_truth_fills: Vec<String>,
    pub is_member: bool,
}

/// Token scorer for mask selection: lowest score gets masked first.
pub trait MaskScorer: Send + Sync {
    fn score(&self, token: &str) -> f64;
}

/// Default scorer: corpus occurrence count (rarest first).
pub struct CorpusRarityScorer {
    frequency: HashMap<String, usize>,
}

impl CorpusRarityScorer {
    pub fn from_corpus(corpus: &[Document]) -> Self {
        let mut frequency = HashMap::new();
        for doc in corpus {
            for token in tokenize(&doc.text) {
                *frequency.entry(token).or_insert(0) += 1;
            }
        }
        Self { frequency }
    }
}

impl MaskScorer for CorpusRarityScorer {
    fn score(&self, token: &str) -> f64 {
        self.frequency.get(token).copied().unwrap_or(0) as f64
    }
}

/// Mask the `masks` lowest-scoring distinct tokens of `doc` (ties by first
/// occurrence). Returns `None` when the document has fewer distinct
/// tokens than requested masks.
fn mask_document(doc: &Document, masks: usize, scorer: &dyn MaskScorer) -> Option<MbaProbe> {
    let spans = tokenize_spans(&doc.text);
    // First occurrence per distinct token.
    let mut first: Vec<(String, usize)> = Vec::new();
    for (i, s) in spans.iter().enumerate() {
        if !first.iter().any(|(t, _)| t == &s.token) {
            first.push((s.token.clone(), i));
        }
    }
    if first.len() < masks {
        return None;
    }
    first.sort_by(|a, b| {
        scorer
            .score(&a.0)
            .partial_cmp(&scorer.score(&b.0))
            .unwrap()
            .then(a.1.cmp(&b.1))
    });
    let mut positions: Vec<usize> = first.iter().take(masks).map(|(_, i)| *i).collect();
    positions.sort_unstable();

    let mut masked_text = String::new();
    let mut cursor = 0usize;
    let mut fills = Vec::with_capacity(masks);
    for (number, &pos) in positions.iter().enumerate() {
        let span: &TokenSpan = &spans[pos];
        masked_text.push_str(&doc.text[cursor..span.start]);
        masked_text.push_str(&format!("[MASK_{}]", number + 1));
        fills.push(span.token.clone());
        cursor = span.end;
    }
    masked_text.push_str(&doc.text[cursor..]);

    // Membership is stamped by the caller; masking itself is agnostic.
    Some(MbaProbe {
        target_doc_id: doc.id.clone(),
        masked_text,
        ground_truth_fills: fills,
        is_member: true,
    })
}

/// Build the probe query text sent through the pipeline.
pub fn probe_query_text(probe: &MbaProbe) -> String {
    format!("{}\n{}", probe.masked_text, MASK_FILL_INSTRUCTION)
}

/// Generate member probes from `corpus` and non-member probes from the
/// `heldout` pool. Documents with too few distinct tokens are skipped with
/// a warning. Selection is a seeded sample without replacement.
pub fn gen_mba_probes(
    corpus: &[Document],
    heldout: &[Document],
    member_count: usize,
    nonmember_count: usize,
    masks: usize,
    rng_seed: u64,
) -> Vec<MbaProbe> {
    let scorer = CorpusRarityScorer::from_corpus(corpus);
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);

    let mut pick = |pool: &[Document], want: usize, member: bool| -> Vec<MbaProbe> {
        let mut order: Vec<usize> = (0..pool.len()).collect();
        order.shuffle(&mut rng);
        let mut probes = Vec::with_capacity(want);
        for idx in order {
            if probes.len() == want {
                break;
            }
            match mask_document(&pool[idx], masks, &scorer) {
                Some(mut probe) => {
                    probe.is_member = member;
                    probes.push(probe);
                }
                None => log::warn!(
                    "document {} has fewer than {masks} distinct tokens; skipped",
                    pool[idx].id
                ),
            }
        }
        probes
    };

    let mut probes = pick(corpus, member_count, true);
    probes.extend(pick(heldout, nonmember_count, false));
    probes
}

/// Extract the per-mask fills claimed by `answer`.
///
/// Two conventions are recognized. Structured answers list
/// `MASK_i = token` lines. Free-text answers (the echo generator included)
/// are parsed by locating each mask's surrounding tokens from the masked
/// document inside the answer and reading the token in the gap.
pub fn parse_fills(answer: &str, probe: &MbaProbe) -> Vec<Option<String>> {
    let count = probe.ground_truth_fills.len();
    let mut fills: Vec<Option<String>> = (1..=count).map(|i| structured_fill(answer, i)).collect();
    if fills.iter().all(Option::is_some) {
        return fills;
    }

    let answer_tokens = tokenize(answer);
    let segments = split_on_placeholders(&probe.masked_text, count);
    for i in 0..count {
        if fills[i].is_some() {
            continue;
        }
        let prefix = last_tokens(&segments[i], 3);
        let suffix = first_tokens(&segments[i + 1], 3);
        fills[i] = locate_gap(&answer_tokens, &prefix, &suffix);
    }
    fills
}

fn structured_fill(answer: &str, number: usize) -> Option<String> {
    let needle = format!("mask_{number}");
    for line in answer.lines() {
        let lower = line.to_lowercase();
        if let Some(pos) = lower.find(&needle) {
            let rest = &lower[pos + needle.len()..];
            if let Some(eq) = rest.find(['=', ':']) {
                let tokens = tokenize(&rest[eq + 1..]);
                if let Some(first) = tokens.first() {
                    return Some(first.clone());
                }
            }
        }
    }
    None
}

fn split_on_placeholders(masked_text: &str, count: usize) -> Vec<String> {
    let mut segments = Vec::with_capacity(count + 1);
    let mut rest = masked_text;
    for i in 1..=count {
        let placeholder = format!("[MASK_{i}]");
        match rest.find(&placeholder) {
            Some(pos) => {
                segments.push(rest[..pos].to_string());
                rest = &rest[pos + placeholder.len()..];
            }
            None => segments.push(String::new()),
        }
    }
    segments.push(rest.to_string());
    segments
}

fn last_tokens(segment: &str, n: usize) -> Vec<String> {
    let tokens = tokenize(segment);
    tokens[tokens.len().saturating_sub(n)..].to_vec()
}

fn first_tokens(segment: &str, n: usize) -> Vec<String> {
    let mut tokens = tokenize(segment);
    tokens.truncate(n);
    tokens
}

fn locate_gap(answer: &[String], prefix: &[String], suffix: &[String]) -> Option<String> {
    if prefix.is_empty() && suffix.is_empty() {
        return None;
    }
    let window = prefix.len() + 1 + suffix.len();
    if answer.len() < window {
        return None;
    }
    for start in 0..=answer.len() - window {
        let gap = start + prefix.len();
        if answer[start..gap] == *prefix && answer[gap + 1..start + window] == *suffix {
            return Some(answer[gap].clone());
        }
    }
    None
}

/// 1 iff every ground-truth fill is reproduced exactly (case-folded) at
/// its mask position under the parsing convention above.
pub fn score_mba(answer: &GeneratedAnswer, probe: &MbaProbe) -> u8 {
    let fills = parse_fills(&answer.text, probe);
    let all_exact = fills.len() == probe.ground_truth_fills.len()
        && fills.iter().zip(&probe.ground_truth_fills).all(|(got, want)| {
            got.as_deref().map(str::to_lowercase) == Some(want.to_lowercase())
        });
    u8::from(all_exact)
}
