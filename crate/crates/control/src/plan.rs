//! Defense plans: the strategist's output, one per pass.
//!
//! Stage-1 plans configure the pre-retrieval hook and the retrieval call
//! (sanitization, DP parameters). Stage-2 plans configure everything after
//! retrieval (poison filtering, context pruning, output audit). The stage
//! discipline is validated, not assumed.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use ragward_defense::config::names;
use ragward_defense::{DefenseConfig, HookStage};

use crate::error::ControlError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PlanStage {
    Stage1,
    Stage2,
}

/// Names of the defenses available to the strategist.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefenseRegistry(pub BTreeSet<String>);

impl Default for DefenseRegistry {
    fn default() -> Self {
        Self(names::ALL.iter().map(|n| n.to_string()).collect())
    }
}

impl DefenseRegistry {
    pub fn contains(&self, name: &str) -> bool {
        self.0.contains(name)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Hook configuration for one pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefensePlan {
    pub stage: PlanStage,
    pub config: DefenseConfig,
    pub hook_bindings: BTreeMap<HookStage, Vec<String>>,
}

impl DefensePlan {
    /// An all-off plan for `stage`.
    pub fn empty(stage: PlanStage) -> Self {
        Self { stage, config: DefenseConfig::default(), hook_bindings: BTreeMap::new() }
    }

    /// Build a stage-1 plan from a config whose post-retrieval switches
    /// are all off; bindings are derived from the enabled switches.
    pub fn stage1(config: DefenseConfig) -> Self {
        let mut bindings: BTreeMap<HookStage, Vec<String>> = BTreeMap::new();
        let mut pre = Vec::new();
        if config.sanitize_enabled {
            pre.push(names::SANITIZE.to_string());
        }
        if config.dp_enabled {
            pre.push(names::DP_RETRIEVAL.to_string());
        }
        if !pre.is_empty() {
            bindings.insert(HookStage::PreRetrieval, pre);
        }
        Self { stage: PlanStage::Stage1, config, hook_bindings: bindings }
    }

    /// Build a stage-2 plan; bindings are derived from the enabled
    /// switches.
    pub fn stage2(config: DefenseConfig) -> Self {
        let mut bindings: BTreeMap<HookStage, Vec<String>> = BTreeMap::new();
        if config.trustrag_enabled {
            bindings.insert(HookStage::PostRetrieval, vec![names::TRUSTRAG.to_string()]);
        }
        if config.av_enabled {
            bindings.insert(HookStage::PreGeneration, vec![names::AV_FILTER.to_string()]);
        }
        if config.audit_enabled {
            bindings.insert(HookStage::PostGeneration, vec![names::AUDIT.to_string()]);
        }
        Self { stage: PlanStage::Stage2, config, hook_bindings: bindings }
    }

    /// Enforce the stage discipline: stage-1 plans may only touch
    /// pre-retrieval and retrieval-stage settings, stage-2 plans may only
    /// touch post-retrieval, pre-generation and post-generation settings.
    pub fn validate(&self) -> Result<(), ControlError> {
        self.config.validate().map_err(|e| ControlError::StageViolation(e.to_string()))?;
        match self.stage {
            PlanStage::Stage1 => {
                if self.config.trustrag_enabled || self.config.av_enabled || self.config.audit_enabled
                {
                    return Err(ControlError::StageViolation(
                        "stage-1 plan enables a post-retrieval defense".into(),
                    ));
                }
                if self.hook_bindings.keys().any(|k| *k != HookStage::PreRetrieval) {
                    return Err(ControlError::StageViolation(
                        "stage-1 plan binds a non-pre-retrieval hook".into(),
                    ));
                }
            }
            PlanStage::Stage2 => {
                if self.config.dp_enabled || self.config.sanitize_enabled {
                    return Err(ControlError::StageViolation(
                        "stage-2 plan mutates DP or sanitize settings".into(),
                    ));
                }
                if self.hook_bindings.contains_key(&HookStage::PreRetrieval) {
                    return Err(ControlError::StageViolation(
                        "stage-2 plan binds the pre-retrieval hook".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// All defense names bound by this plan, in hook order.
    pub fn bound_names(&self) -> Vec<String> {
        self.hook_bindings.values().flatten().cloned().collect()
    }

    pub fn is_empty(&self) -> bool {
        self.hook_bindings.values().all(|v| v.is_empty())
    }
}
