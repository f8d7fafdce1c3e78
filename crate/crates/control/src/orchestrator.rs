//! Per-query orchestration: the two-pass control loop around the engine.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use ragward_core::{GeneratedAnswer, Query, RagEngine, ScoredChunk};
use ragward_defense::{audit_output, av_prune, dp_retrieve, trustrag_filter, QuerySanitizer};

use crate::error::ControlError;
use crate::metrics::{compute_post_metrics, compute_pre_metrics, PostMetrics, PreMetrics};
use crate::plan::{DefensePlan, DefenseRegistry, PlanStage};
use crate::profile::RiskProfile;
use crate::sentinel::{SentinelController, SentinelInput};
use crate::strategist::StrategistController;
use crate::trust::{InteractionRecord, TrustStore};

/// System-prompt guardrail injected at the pre-generation hook when the
/// stage-2 plan arms context pruning.
pub const GUARDRAIL_PROMPT: &str =
    "Do not reproduce retrieved passages verbatim; summarize only what the query needs.";

/// Reference to a retrieved chunk without its text. Decision logs carry
/// these so the control plane's outputs never contain document content.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChunkRef {
    pub doc_id: String,
    pub chunk_index: usize,
    pub score: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noisy_score: Option<f64>,
}

impl From<&ScoredChunk> for ChunkRef {
    fn from(s: &ScoredChunk) -> Self {
        Self {
            doc_id: s.chunk.doc_id.clone(),
            chunk_index: s.chunk.chunk_index,
            score: s.score,
            noisy_score: s.noisy_score,
        }
    }
}

/// Structured record of one orchestrated interaction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionLog {
    pub user_id: String,
    pub query_text: String,
    pub sanitized_query: Option<String>,
    pub pre_metrics: PreMetrics,
    pub post_metrics: PostMetrics,
    pub profile_pre: RiskProfile,
    pub profile_post: RiskProfile,
    pub plan_pre: DefensePlan,
    pub plan_post: DefensePlan,
    pub retrieved: Vec<ChunkRef>,
    pub removed_post_retrieval: Vec<ChunkRef>,
    pub removed_pre_generation: Vec<ChunkRef>,
    pub defenses_fired: Vec<String>,
    pub output_masked: bool,
    pub delta_pre: f64,
    pub delta_post: f64,
    pub trust_before: f64,
    pub trust_after: f64,
}

#[derive(Debug, Clone)]
pub struct OrchestratedAnswer {
    pub answer: GeneratedAnswer,
    pub context: Vec<ScoredChunk>,
    pub log: DecisionLog,
}

/// Owns the engine plus the control-plane pieces and executes the
/// per-query procedure.
pub struct Orchestrator {
    pub engine: RagEngine,
    sentinel: Arc<dyn SentinelController>,
    strategist: Arc<dyn StrategistController>,
    pub trust: TrustStore,
    registry: DefenseRegistry,
    sanitizer: QuerySanitizer,
}

impl Orchestrator {
    pub fn new(
        engine: RagEngine,
        sentinel: Arc<dyn SentinelController>,
        strategist: Arc<dyn StrategistController>,
        trust: TrustStore,
    ) -> Result<Self, ControlError> {
        let registry = DefenseRegistry::default();
        if registry.is_empty() {
            return Err(ControlError::EmptyRegistry);
        }
        Ok(Self {
            engine,
            sentinel,
            strategist,
            trust,
            registry,
            sanitizer: QuerySanitizer::with_defaults(),
        })
    }

    pub fn registry(&self) -> &DefenseRegistry {
        &self.registry
    }

    /// Execute the full two-pass procedure for one query. `dp_seed` fixes
    /// the noise draw should the stage-1 plan arm DP retrieval, keeping
    /// replays bit-identical.
    pub fn orchestrate_query(
        &self,
        query: &Query,
        dp_seed: u64,
    ) -> Result<OrchestratedAnswer, ControlError> {
        let user_lock = self.trust.user_lock(&query.user_id);
        let _guard = user_lock.lock().unwrap();

        let record = self.trust.get_or_create(&query.user_id);
        let trust_before = record.score;

        // Pass 1: pre-retrieval analysis and plan.
        let pre_metrics = compute_pre_metrics(query, &record);
        let profile_pre = self.sentinel.assess(&SentinelInput {
            stage: PlanStage::Stage1,
            query,
            trust: &record,
            pre: &pre_metrics,
            post: None,
        });
        let plan_pre =
            self.strategist.plan(&profile_pre, &record, PlanStage::Stage1, &self.registry);
        plan_pre.validate()?;

        // Pre-retrieval hook: sanitize the query, stage DP parameters.
        let query_text = if plan_pre.config.sanitize_enabled {
            self.sanitizer.apply(&query.text)
        } else {
            query.text.clone()
        };
        let sanitized_query =
            (query_text != query.text).then(|| query_text.clone());

        let query_vec = self.engine.embed_query(&query_text);
        let retrieved = if plan_pre.config.dp_enabled {
            dp_retrieve(
                self.engine.index(),
                &query_vec,
                self.engine.top_k,
                plan_pre.config.dp_epsilon,
                plan_pre.config.dp_candidate_multiplier,
                dp_seed,
            )?
        } else {
            self.engine.index().search(&query_vec, self.engine.top_k)?
        };

        // Pass 2: refine with retrieval metrics and plan the back half.
        let post_metrics = compute_post_metrics(&retrieved, self.engine.embedder());
        let profile_post = self.sentinel.assess(&SentinelInput {
            stage: PlanStage::Stage2,
            query,
            trust: &record,
            pre: &pre_metrics,
            post: Some(&post_metrics),
        });
        let plan_post =
            self.strategist.plan(&profile_post, &record, PlanStage::Stage2, &self.registry);
        plan_post.validate()?;

        // Post-retrieval hook: poison filtering.
        let mut context = retrieved.clone();
        let mut removed_post_retrieval = Vec::new();
        if plan_post.config.trustrag_enabled {
            let kept = trustrag_filter(
                &context,
                plan_post.config.trustrag_sigma,
                plan_post.config.trustrag_rho,
                self.engine.embedder(),
            )?;
            removed_post_retrieval = diff_refs(&context, &kept);
            context = kept;
        }

        // Pre-generation hook: attention-variance pruning plus guardrail.
        let mut removed_pre_generation = Vec::new();
        if plan_post.config.av_enabled && !context.is_empty() {
            let kept = av_prune(
                &context,
                &query_vec,
                plan_post.config.av_max_removals,
                plan_post.config.av_threshold,
                self.engine.embedder(),
            )?;
            removed_pre_generation = diff_refs(&context, &kept);
            context = kept;
        }
        let system_prompt = if plan_post.config.av_enabled {
            format!("{}\n{}", self.engine.system_prompt, GUARDRAIL_PROMPT)
        } else {
            self.engine.system_prompt.clone()
        };

        let mut answer = self.engine.generate_with_system(&query_text, &context, &system_prompt);

        // Post-generation hook: output audit.
        if plan_post.config.audit_enabled {
            answer = audit_output(answer, &context, plan_post.config.audit_ngram);
        }

        // Close the interaction: apply both deltas and write through.
        let mut defenses_fired = plan_pre.bound_names();
        defenses_fired.extend(plan_post.bound_names());
        let context_pruned =
            !removed_post_retrieval.is_empty() || !removed_pre_generation.is_empty();
        let (delta_pre, delta_post) = (profile_pre.delta, profile_post.delta);
        let mut updated = record;
        updated.update(
            delta_pre,
            delta_post,
            InteractionRecord {
                query_text: query.text.clone(),
                timestamp: query.timestamp,
                defenses_fired: defenses_fired.clone(),
                context_pruned,
                output_masked: answer.masked,
            },
        )?;
        let trust_after = updated.score;
        self.trust.commit(updated)?;

        let log = DecisionLog {
            user_id: query.user_id.clone(),
            query_text: query.text.clone(),
            sanitized_query,
            pre_metrics,
            post_metrics,
            profile_pre,
            profile_post,
            plan_pre,
            plan_post,
            retrieved: retrieved.iter().map(ChunkRef::from).collect(),
            removed_post_retrieval,
            removed_pre_generation,
            defenses_fired,
            output_masked: answer.masked,
            delta_pre,
            delta_post,
            trust_before,
            trust_after,
        };

        Ok(OrchestratedAnswer { answer, context, log })
    }
}

fn diff_refs(before: &[ScoredChunk], after: &[ScoredChunk]) -> Vec<ChunkRef> {
    before
        .iter()
        .filter(|b| !after.iter().any(|a| a.chunk == b.chunk))
        .map(ChunkRef::from)
        .collect()
}
