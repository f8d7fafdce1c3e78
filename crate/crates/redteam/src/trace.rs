//! Evaluation traces: JSON Lines of replayable query items.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use ragward_core::{Query, TraceTag};

use crate::mba::MbaProbe;
use crate::poison::PoisonSpec;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("trace item {index}: tag {tag:?} inconsistent with payload")]
    TagMismatch { index: usize, tag: TraceTag },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AttackPayload {
    Poison(PoisonSpec),
    Mba(MbaProbe),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceItem {
    pub query: Query,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_answer: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attack_payload: Option<AttackPayload>,
}

impl TraceItem {
    pub fn benign(query: Query, expected: Option<String>) -> Self {
        Self { query, expected_answer: expected, attack_payload: None }
    }

    /// The item's tag must agree with its payload kind.
    pub fn validate(&self, index: usize) -> Result<(), TraceError> {
        let consistent = match (&self.attack_payload, self.query.trace_tag) {
            (None, TraceTag::Benign) => true,
            (Some(AttackPayload::Poison(_)), TraceTag::PoisonTrigger) => true,
            (Some(AttackPayload::Mba(_)), TraceTag::MiaProbe) => true,
            _ => false,
        };
        if consistent {
            Ok(())
        } else {
            Err(TraceError::TagMismatch { index, tag: self.query.trace_tag })
        }
    }
}

pub fn write_trace_jsonl(path: &Path, trace: &[TraceItem]) -> Result<(), TraceError> {
    let mut file = std::fs::File::create(path)?;
    for item in trace {
        let line = serde_json::to_string(item)
            .map_err(|e| TraceError::Format { line: 0, message: e.to_string() })?;
        file.write_all(line.as_bytes())?;
        file.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_trace_jsonl(path: &Path) -> Result<Vec<TraceItem>, TraceError> {
    let file = std::fs::File::open(path)?;
    let mut out = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let item: TraceItem = serde_json::from_str(&line)
            .map_err(|e| TraceError::Format { line: lineno + 1, message: e.to_string() })?;
        item.validate(lineno)?;
        out.push(item);
    }
    Ok(out)
}
