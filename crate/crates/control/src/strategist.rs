//! Strategist: mapping risk profiles to hook-level defense plans.

use std::sync::Arc;

use serde_json::json;

use ragward_core::{ModelEndpoint, Role};
use ragward_defense::config::names;
use ragward_defense::DefenseConfig;

use crate::plan::{DefensePlan, DefenseRegistry, PlanStage};
use crate::profile::{RiskLevel, RiskProfile};
use crate::sentinel::{P_HIGH, P_MODERATE};
use crate::trust::TrustRecord;

/// Privacy budget used when membership-inference risk is moderate.
pub const DP_EPSILON_DEFAULT: f64 = 3.0;
/// Tightened budget when membership-inference risk is high.
pub const DP_EPSILON_TIGHT: f64 = 1.0;

pub trait StrategistController: Send + Sync {
    fn name(&self) -> &'static str;
    fn plan(
        &self,
        profile: &RiskProfile,
        trust: &TrustRecord,
        stage: PlanStage,
        registry: &DefenseRegistry,
    ) -> DefensePlan;
}

/// Deterministic rule-table strategist.
#[derive(Debug, Clone, Default)]
pub struct RuleStrategist;

impl RuleStrategist {
    pub fn new() -> Self {
        Self
    }
}

impl StrategistController for RuleStrategist {
    fn name(&self) -> &'static str {
        "rule"
    }

    fn plan(
        &self,
        profile: &RiskProfile,
        trust: &TrustRecord,
        stage: PlanStage,
        registry: &DefenseRegistry,
    ) -> DefensePlan {
        // Low risk plus high trust: run the bare pipeline.
        if profile.level == RiskLevel::Low && trust.score >= 0.9 {
            return DefensePlan::empty(stage);
        }
        let mut config = DefenseConfig::default();
        match stage {
            PlanStage::Stage1 => {
                if profile.p_mia >= P_MODERATE && registry.contains(names::DP_RETRIEVAL) {
                    config.dp_enabled = true;
                    config.dp_epsilon = if profile.p_mia >= P_HIGH {
                        DP_EPSILON_TIGHT
                    } else {
                        DP_EPSILON_DEFAULT
                    };
                }
                if profile.p_leak >= P_MODERATE && registry.contains(names::SANITIZE) {
                    config.sanitize_enabled = true;
                }
                DefensePlan::stage1(config)
            }
            PlanStage::Stage2 => {
                if profile.p_poi >= P_MODERATE && registry.contains(names::TRUSTRAG) {
                    config.trustrag_enabled = true;
                }
                if profile.p_leak >= P_MODERATE || profile.level == RiskLevel::Critical {
                    if registry.contains(names::AV_FILTER) {
                        config.av_enabled = true;
                    }
                    if registry.contains(names::AUDIT) {
                        config.audit_enabled = true;
                    }
                }
                DefensePlan::stage2(config)
            }
        }
    }
}

/// Chat-model strategist with rule fallback. Unknown defense names in the
/// reply are dropped; stage-discipline violations reject the whole reply.
pub struct RemoteStrategist {
    endpoint: Arc<dyn ModelEndpoint>,
    fallback: RuleStrategist,
}

impl RemoteStrategist {
    pub fn new(endpoint: Arc<dyn ModelEndpoint>) -> Self {
        Self { endpoint, fallback: RuleStrategist::new() }
    }
}

impl StrategistController for RemoteStrategist {
    fn name(&self) -> &'static str {
        "remote"
    }

    fn plan(
        &self,
        profile: &RiskProfile,
        trust: &TrustRecord,
        stage: PlanStage,
        registry: &DefenseRegistry,
    ) -> DefensePlan {
        let payload = json!({
            "stage": stage,
            "trust": { "user_id": trust.user_id, "score": trust.score },
            "profile": profile,
            "registry": registry.0,
        });
        let outcome = self
            .endpoint
            .call(Role::Strategist, &payload)
            .map_err(|e| e.to_string())
            .and_then(|reply| {
                serde_json::from_value::<DefensePlan>(reply).map_err(|e| e.to_string())
            })
            .and_then(|mut plan| {
                if plan.stage != stage {
                    return Err(format!("reply stage {:?} does not match {:?}", plan.stage, stage));
                }
                for bound in plan.hook_bindings.values_mut() {
                    bound.retain(|name| {
                        let known = registry.contains(name);
                        if !known {
                            log::warn!("strategist reply named unknown defense {name:?}; ignored");
                        }
                        known
                    });
                }
                plan.validate().map_err(|e| e.to_string())?;
                Ok(plan)
            });
        match outcome {
            Ok(plan) => plan,
            Err(reason) => {
                log::warn!("remote strategist degraded to rule controller: {reason}");
                self.fallback.plan(profile, trust, stage, registry)
            }
        }
    }
}
