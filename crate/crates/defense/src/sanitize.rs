//! Pre-retrieval query sanitization.

use regex::Regex;

use crate::config::DefenseError;

/// Replacement for matched spans.
pub const REDACTED_TOKEN: &str = "[REDACTED]";

/// Default pattern set: email-like shapes and runs of six or more digits.
pub fn default_patterns() -> Vec<String> {
    vec![
        r"[A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,}".to_string(),
        r"\d{6,}".to_string(),
    ]
}

/// Compiled sanitizer. Patterns are validated once at configuration load;
/// application never fails.
#[derive(Debug, Clone)]
pub struct QuerySanitizer {
    patterns: Vec<Regex>,
}

impl QuerySanitizer {
    pub fn new(patterns: &[String]) -> Result<Self, DefenseError> {
        let compiled = patterns
            .iter()
            .map(|p| {
                Regex::new(p).map_err(|e| DefenseError::InvalidPattern {
                    pattern: p.clone(),
                    message: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { patterns: compiled })
    }

    pub fn with_defaults() -> Self {
        Self::new(&default_patterns()).expect("default patterns compile")
    }

    /// Replace every match of every pattern with [`REDACTED_TOKEN`].
    pub fn apply(&self, text: &str) -> String {
        let mut out = text.to_string();
        for pattern in &self.patterns {
            out = pattern.replace_all(&out, REDACTED_TOKEN).into_owned();
        }
        out
    }
}

/// One-shot form: compile `patterns` and sanitize `text`.
pub fn sanitize_query(text: &str, patterns: &[String]) -> Result<String, DefenseError> {
    Ok(QuerySanitizer::new(patterns)?.apply(text))
}
