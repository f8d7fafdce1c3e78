//! Defense configuration and hook stages.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DefenseError {
    #[error("config field {field} out of range: {message}")]
    ConfigRange { field: &'static str, message: String },

    #[error("sanitizer pattern {pattern:?} failed to compile: {message}")]
    InvalidPattern { pattern: String, message: String },

    #[error("clustering requires at least 2 vectors, got {0}")]
    TooFewVectors(usize),

    #[error("attention requires a non-empty context")]
    EmptyContext,

    #[error(transparent)]
    Core(#[from] ragward_core::CoreError),
}

/// The four enforcement points around the engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum HookStage {
    PreRetrieval,
    PostRetrieval,
    PreGeneration,
    PostGeneration,
}

/// Per-query defense switches and parameters. This is the wire object the
/// strategist emits; JSON keys match the field names. Numeric defaults are
/// the standard operating point of each mechanism.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DefenseConfig {
    pub dp_enabled: bool,
    pub dp_epsilon: f64,
    pub dp_candidate_multiplier: usize,
    pub trustrag_enabled: bool,
    pub trustrag_sigma: f64,
    pub trustrag_rho: f64,
    pub av_enabled: bool,
    /// Variance cutoff over attention weights expressed in percentage
    /// points, so the threshold unit is (pp)^2.
    pub av_threshold: f64,
    pub av_max_removals: usize,
    pub sanitize_enabled: bool,
    pub audit_enabled: bool,
    pub audit_ngram: usize,
}

impl Default for DefenseConfig {
    fn default() -> Self {
        Self {
            dp_enabled: false,
            dp_epsilon: 3.0,
            dp_candidate_multiplier: 3,
            trustrag_enabled: false,
            trustrag_sigma: 0.88,
            trustrag_rho: 0.25,
            av_enabled: false,
            av_threshold: 50.0,
            av_max_removals: 3,
            sanitize_enabled: false,
            audit_enabled: false,
            audit_ngram: 8,
        }
    }
}

impl DefenseConfig {
    /// Everything switched on at default parameters.
    pub fn all_enabled() -> Self {
        Self {
            dp_enabled: true,
            trustrag_enabled: true,
            av_enabled: true,
            sanitize_enabled: true,
            audit_enabled: true,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), DefenseError> {
        fn range(
            field: &'static str,
            ok: bool,
            message: impl Into<String>,
        ) -> Result<(), DefenseError> {
            if ok {
                Ok(())
            } else {
                Err(DefenseError::ConfigRange { field, message: message.into() })
            }
        }
        range("dp_epsilon", self.dp_epsilon > 0.0, format!("{} must be > 0", self.dp_epsilon))?;
        range(
            "dp_candidate_multiplier",
            self.dp_candidate_multiplier >= 1,
            "must be >= 1",
        )?;
        range(
            "trustrag_sigma",
            (0.0..=1.0).contains(&self.trustrag_sigma),
            format!("{} must be in [0,1]", self.trustrag_sigma),
        )?;
        range(
            "trustrag_rho",
            (0.0..=1.0).contains(&self.trustrag_rho),
            format!("{} must be in [0,1]", self.trustrag_rho),
        )?;
        range(
            "av_threshold",
            self.av_threshold >= 0.0,
            format!("{} must be >= 0", self.av_threshold),
        )?;
        range("av_max_removals", self.av_max_removals >= 1, "must be >= 1")?;
        range("audit_ngram", self.audit_ngram >= 1, "must be >= 1")?;
        Ok(())
    }

    /// Names of the enabled defenses, in hook order.
    pub fn enabled_names(&self) -> Vec<&'static str> {
        let mut names = Vec::new();
        if self.sanitize_enabled {
            names.push(names::SANITIZE);
        }
        if self.dp_enabled {
            names.push(names::DP_RETRIEVAL);
        }
        if self.trustrag_enabled {
            names.push(names::TRUSTRAG);
        }
        if self.av_enabled {
            names.push(names::AV_FILTER);
        }
        if self.audit_enabled {
            names.push(names::AUDIT);
        }
        names
    }
}

/// Canonical defense names used in plans, registries and decision logs.
pub mod names {
    pub const SANITIZE: &str = "sanitize";
    pub const DP_RETRIEVAL: &str = "dp_retrieval";
    pub const TRUSTRAG: &str = "trustrag";
    pub const AV_FILTER: &str = "av_filter";
    pub const AUDIT: &str = "audit";

    pub const ALL: [&str; 5] = [SANITIZE, DP_RETRIEVAL, TRUSTRAG, AV_FILTER, AUDIT];
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_standard_operating_point() {
        let c = DefenseConfig::default();
        assert_eq!(c.dp_epsilon, 3.0);
        assert_eq!(c.dp_candidate_multiplier, 3);
        assert_eq!(c.trustrag_sigma, 0.88);
        assert_eq!(c.trustrag_rho, 0.25);
        assert_eq!(c.av_threshold, 50.0);
        assert_eq!(c.av_max_removals, 3);
        assert_eq!(c.audit_ngram, 8);
        c.validate().unwrap();
    }

    #[test]
    fn out_of_range_sigma_is_rejected() {
        let c = DefenseConfig { trustrag_sigma: 1.2, ..Default::default() };
        assert!(c.validate().is_err());
    }

    #[test]
    fn json_keys_match_field_names() {
        let c = DefenseConfig::default();
        let json = serde_json::to_value(&c).unwrap();
        for key in [
            "dp_enabled",
            "dp_epsilon",
            "dp_candidate_multiplier",
            "trustrag_enabled",
            "trustrag_sigma",
            "trustrag_rho",
            "av_enabled",
            "av_threshold",
            "av_max_removals",
            "sanitize_enabled",
            "audit_enabled",
            "audit_ngram",
        ] {
            assert!(json.get(key).is_some(), "missing key {key}");
        }
        let back: DefenseConfig = serde_json::from_value(json).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn partial_json_fills_defaults() {
        let c: DefenseConfig = serde_json::from_str("{\"dp_enabled\":true}").unwrap();
        assert!(c.dp_enabled);
        assert_eq!(c.dp_epsilon, 3.0);
    }
}
