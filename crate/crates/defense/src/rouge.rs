//! ROUGE-L similarity over word tokens (F1 flavour, beta = 1).

use ragward_core::tokenize;

fn lcs_len(a: &[String], b: &[String]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut prev = vec![0usize; b.len() + 1];
    let mut row = vec![0usize; b.len() + 1];
    for ta in a {
        for (j, tb) in b.iter().enumerate() {
            row[j + 1] = if ta == tb { prev[j] + 1 } else { row[j].max(prev[j + 1]) };
        }
        std::mem::swap(&mut prev, &mut row);
    }
    prev[b.len()]
}

/// ROUGE-L F1 between two strings: precision `L/|a|`, recall `L/|b|` over
/// the word-token LCS length `L`. Either side empty scores 0.
pub fn rouge_l(a: &str, b: &str) -> f64 {
    let ta = tokenize(a);
    let tb = tokenize(b);
    if ta.is_empty() || tb.is_empty() {
        return 0.0;
    }
    let lcs = lcs_len(&ta, &tb) as f64;
    if lcs == 0.0 {
        return 0.0;
    }
    let precision = lcs / ta.len() as f64;
    let recall = lcs / tb.len() as f64;
    2.0 * precision * recall / (precision + recall)
}
