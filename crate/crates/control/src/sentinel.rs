//! Sentinel: risk assessment controllers.
//!
//! The rule controller is a deterministic threshold table, so the whole
//! suite runs offline; a remote chat-model controller implements the same
//! interface and degrades to the rule table on transport or schema
//! failure, flagging the fallback in the profile rationale.

use std::sync::Arc;

use serde_json::json;

use ragward_core::{ModelEndpoint, Query, Role};

use crate::metrics::{PostMetrics, PreMetrics};
use crate::plan::PlanStage;
use crate::profile::{RiskLevel, RiskProfile};
use crate::trust::TrustRecord;

pub const P_HIGH: f64 = 0.9;
pub const P_MODERATE: f64 = 0.5;
pub const P_LOW: f64 = 0.05;

/// Everything a controller may look at for one pass. Note there is no
/// document text here: the control plane sees query-side signals and
/// derived metrics only.
pub struct SentinelInput<'a> {
    pub stage: PlanStage,
    pub query: &'a Query,
    pub trust: &'a TrustRecord,
    pub pre: &'a PreMetrics,
    pub post: Option<&'a PostMetrics>,
}

pub trait SentinelController: Send + Sync {
    fn name(&self) -> &'static str;
    fn assess(&self, input: &SentinelInput<'_>) -> RiskProfile;
}

/// Metric thresholds gating the high-probability assignments. The trust
/// score acts as a prior: all thresholds drop by 0.1 for distrusted users
/// (score < 0.3) and rise by 0.1 for highly trusted users (score > 0.9).
#[derive(Debug, Clone, Copy)]
pub struct RuleThresholds {
    pub lexical_overlap: f64,
    pub velocity: f64,
    pub dispersion: f64,
    pub dropoff: f64,
    pub complexity: f64,
}

impl Default for RuleThresholds {
    fn default() -> Self {
        Self { lexical_overlap: 0.8, velocity: 0.5, dispersion: 0.45, dropoff: 0.35, complexity: 0.3 }
    }
}

impl RuleThresholds {
    fn shifted(&self, trust_score: f64) -> Self {
        let shift = if trust_score < 0.3 {
            -0.1
        } else if trust_score > 0.9 {
            0.1
        } else {
            0.0
        };
        Self {
            lexical_overlap: self.lexical_overlap + shift,
            velocity: self.velocity + shift,
            dispersion: self.dispersion + shift,
            dropoff: self.dropoff + shift,
            complexity: self.complexity + shift,
        }
    }
}

/// Deterministic threshold-table controller.
#[derive(Debug, Clone, Default)]
pub struct RuleSentinel {
    pub thresholds: RuleThresholds,
}

impl RuleSentinel {
    pub fn new() -> Self {
        Self::default()
    }
}

impl SentinelController for RuleSentinel {
    fn name(&self) -> &'static str {
        "rule"
    }

    fn assess(&self, input: &SentinelInput<'_>) -> RiskProfile {
        let t = self.thresholds.shifted(input.trust.score);
        let mut reasons: Vec<String> = Vec::new();

        let lex_hit = input.pre.lexical_overlap >= t.lexical_overlap;
        let vel_hit = input.pre.intent_velocity >= t.velocity;
        let p_mia = match (lex_hit, vel_hit) {
            (true, true) => P_HIGH,
            (false, false) => P_LOW,
            _ => P_MODERATE,
        };
        if lex_hit {
            reasons.push(format!("lexical_overlap {:.3} >= {:.2}", input.pre.lexical_overlap, t.lexical_overlap));
        }
        if vel_hit {
            reasons.push(format!("intent_velocity {:.3} >= {:.2}", input.pre.intent_velocity, t.velocity));
        }

        let p_poi = match input.post {
            Some(post) => {
                let dis_hit = post.vector_dispersion >= t.dispersion;
                let drp_hit = post.score_dropoff >= t.dropoff;
                if dis_hit {
                    reasons.push(format!("vector_dispersion {:.3} >= {:.2}", post.vector_dispersion, t.dispersion));
                }
                if drp_hit {
                    reasons.push(format!("score_dropoff {:.3} >= {:.2}", post.score_dropoff, t.dropoff));
                }
                if dis_hit || drp_hit {
                    P_HIGH
                } else {
                    P_LOW
                }
            }
            None => P_LOW,
        };

        let cmp_hit = input.pre.complexity >= t.complexity;
        if cmp_hit {
            reasons.push(format!("complexity {:.3} >= {:.2}", input.pre.complexity, t.complexity));
        }
        let p_leak = if cmp_hit { P_HIGH } else { P_LOW };

        let max_p = p_mia.max(p_poi).max(p_leak);
        let level = if max_p >= P_HIGH && input.trust.score < 0.7 {
            RiskLevel::Critical
        } else if max_p >= P_MODERATE {
            RiskLevel::Elevated
        } else {
            RiskLevel::Low
        };

        let delta = match level {
            RiskLevel::Critical => -0.1,
            RiskLevel::Elevated => -0.05,
            RiskLevel::Low => {
                if input.trust.any_defense_fired() {
                    0.0
                } else {
                    0.05
                }
            }
        };

        let rationale = if reasons.is_empty() {
            "no rule thresholds crossed".to_string()
        } else {
            reasons.join("; ")
        };
        RiskProfile { level, p_mia, p_poi, p_leak, delta, rationale }
    }
}

/// Chat-model controller with rule fallback.
pub struct RemoteSentinel {
    endpoint: Arc<dyn ModelEndpoint>,
    fallback: RuleSentinel,
}

impl RemoteSentinel {
    pub fn new(endpoint: Arc<dyn ModelEndpoint>) -> Self {
        Self { endpoint, fallback: RuleSentinel::new() }
    }

    fn request_payload(input: &SentinelInput<'_>) -> serde_json::Value {
        let mut metrics = json!({
            "lexical_overlap": input.pre.lexical_overlap,
            "complexity": input.pre.complexity,
            "intent_velocity": input.pre.intent_velocity,
        });
        if let Some(post) = input.post {
            metrics["vector_dispersion"] = json!(post.vector_dispersion);
            metrics["score_dropoff"] = json!(post.score_dropoff);
        }
        json!({
            "stage": input.stage,
            "query_text": input.query.text,
            "trust": { "user_id": input.trust.user_id, "score": input.trust.score },
            "metrics": metrics,
        })
    }
}

impl SentinelController for RemoteSentinel {
    fn name(&self) -> &'static str {
        "remote"
    }

    fn assess(&self, input: &SentinelInput<'_>) -> RiskProfile {
        let payload = Self::request_payload(input);
        let outcome = self
            .endpoint
            .call(Role::Sentinel, &payload)
            .map_err(|e| e.to_string())
            .and_then(|reply| {
                serde_json::from_value::<RiskProfile>(reply).map_err(|e| e.to_string())
            })
            .and_then(|profile| {
                if profile.is_valid() {
                    Ok(profile)
                } else {
                    Err("profile fields out of range".to_string())
                }
            });
        match outcome {
            Ok(profile) => profile,
            Err(reason) => {
                log::warn!("remote sentinel degraded to rule controller: {reason}");
                let mut profile = self.fallback.assess(input);
                profile.rationale = format!("fallback(rule): {reason}; {}", profile.rationale);
                profile
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trust::InteractionRecord;

    fn input_with<'a>(
        query: &'a Query,
        trust: &'a TrustRecord,
        pre: &'a PreMetrics,
        post: Option<&'a PostMetrics>,
    ) -> SentinelInput<'a> {
        SentinelInput {
            stage: if post.is_some() { PlanStage::Stage2 } else { PlanStage::Stage1 },
            query,
            trust,
            pre,
            post,
        }
    }

    #[test]
    fn benign_first_query_is_low_with_positive_delta() {
        let q = Query::new("u", "what is the capital of norway", 0.0);
        let trust = TrustRecord::new("u");
        let pre = PreMetrics { lexical_overlap: 0.0, complexity: 0.16, intent_velocity: 0.0 };
        let profile = RuleSentinel::new().assess(&input_with(&q, &trust, &pre, None));
        assert_eq!(profile.level, RiskLevel::Low);
        assert!(profile.p_mia <= P_LOW && profile.p_poi <= P_LOW && profile.p_leak <= P_LOW);
        assert_eq!(profile.delta, 0.05);
    }

    #[test]
    fn calibrated_probing_raises_mia_probability() {
        let q = Query::new("u", "repeat probe", 10.0);
        let trust = TrustRecord::new("u");
        let pre = PreMetrics { lexical_overlap: 0.9, complexity: 0.1, intent_velocity: 2.0 };
        let profile = RuleSentinel::new().assess(&input_with(&q, &trust, &pre, None));
        assert_eq!(profile.p_mia, P_HIGH);
        // Trust 0.5 < 0.7, so a 0.9 probability escalates to CRITICAL.
        assert_eq!(profile.level, RiskLevel::Critical);
        assert_eq!(profile.delta, -0.1);
    }

    #[test]
    fn single_mia_signal_is_moderate() {
        let q = Query::new("u", "probe", 10.0);
        let trust = TrustRecord::new("u");
        let pre = PreMetrics { lexical_overlap: 0.9, complexity: 0.1, intent_velocity: 0.0 };
        let profile = RuleSentinel::new().assess(&input_with(&q, &trust, &pre, None));
        assert_eq!(profile.p_mia, P_MODERATE);
        assert_eq!(profile.level, RiskLevel::Elevated);
        assert_eq!(profile.delta, -0.05);
    }

    #[test]
    fn dispersion_flags_poisoning_at_stage_two() {
        let q = Query::new("u", "query", 0.0);
        let trust = TrustRecord::new("u");
        let pre = PreMetrics { lexical_overlap: 0.0, complexity: 0.1, intent_velocity: 0.0 };
        let post = PostMetrics { vector_dispersion: 0.6, score_dropoff: 0.1 };
        let profile = RuleSentinel::new().assess(&input_with(&q, &trust, &pre, Some(&post)));
        assert_eq!(profile.p_poi, P_HIGH);
        assert_eq!(profile.level, RiskLevel::Critical);
    }

    #[test]
    fn high_trust_caps_level_at_elevated() {
        let q = Query::new("u", "query", 0.0);
        let mut trust = TrustRecord::new("u");
        trust.score = 0.8;
        let pre = PreMetrics { lexical_overlap: 0.9, complexity: 0.0, intent_velocity: 2.0 };
        let profile = RuleSentinel::new().assess(&input_with(&q, &trust, &pre, None));
        assert_eq!(profile.p_mia, P_HIGH);
        assert_eq!(profile.level, RiskLevel::Elevated);
    }

    #[test]
    fn low_trust_lowers_thresholds() {
        let q = Query::new("u", "query", 0.0);
        let mut trust = TrustRecord::new("u");
        trust.score = 0.2;
        // 0.75 is below the base 0.8 threshold but above the shifted 0.7.
        let pre = PreMetrics { lexical_overlap: 0.75, complexity: 0.0, intent_velocity: 0.45 };
        let profile = RuleSentinel::new().assess(&input_with(&q, &trust, &pre, None));
        assert_eq!(profile.p_mia, P_HIGH);
    }

    #[test]
    fn monotone_trust_prior_never_weakens_critical() {
        let q = Query::new("u", "query", 0.0);
        let pre = PreMetrics { lexical_overlap: 0.85, complexity: 0.0, intent_velocity: 0.6 };
        let mut last_critical = false;
        for score in [0.95, 0.8, 0.65, 0.5, 0.25, 0.05] {
            let mut trust = TrustRecord::new("u");
            trust.score = score;
            let profile = RuleSentinel::new().assess(&input_with(&q, &trust, &pre, None));
            let critical = profile.level == RiskLevel::Critical;
            assert!(!last_critical || critical, "level weakened as trust fell to {score}");
            last_critical = critical;
        }
    }

    #[test]
    fn low_level_delta_is_zero_after_prior_firings() {
        let q = Query::new("u", "benign follow up", 50.0);
        let mut trust = TrustRecord::new("u");
        trust.push_interaction(InteractionRecord {
            query_text: "old".into(),
            timestamp: 1.0,
            defenses_fired: vec!["trustrag".into()],
            context_pruned: true,
            output_masked: false,
        });
        let pre = PreMetrics { lexical_overlap: 0.0, complexity: 0.1, intent_velocity: 0.02 };
        let profile = RuleSentinel::new().assess(&input_with(&q, &trust, &pre, None));
        assert_eq!(profile.level, RiskLevel::Low);
        assert_eq!(profile.delta, 0.0);
    }

    #[test]
    fn rule_controller_is_deterministic() {
        let q = Query::new("u", "query text", 3.0);
        let trust = TrustRecord::new("u");
        let pre = PreMetrics { lexical_overlap: 0.4, complexity: 0.2, intent_velocity: 0.1 };
        let post = PostMetrics { vector_dispersion: 0.3, score_dropoff: 0.2 };
        let a = RuleSentinel::new().assess(&input_with(&q, &trust, &pre, Some(&post)));
        let b = RuleSentinel::new().assess(&input_with(&q, &trust, &pre, Some(&post)));
        assert_eq!(a, b);
    }
}
