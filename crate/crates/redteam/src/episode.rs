//! Policy replay over evaluation traces.
//!
//! Four policies bracket the design space: the undefended baseline, a
//! static stack with every defense forced on, a static stack with exactly
//! one defense on, and the adaptive orchestrator. The same trace replays
//! under each so security and utility move on the same inputs.

use std::collections::HashSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use ragward_control::{
    DecisionLog, Orchestrator, RuleSentinel, RuleStrategist, TrustStore,
};
use ragward_core::{Document, Generator, Query, RagEngine, ScoredChunk, TraceTag};
use ragward_defense::config::names;
use ragward_defense::{
    audit_output, av_prune, dp_retrieve, trustrag_filter, DefenseConfig, QuerySanitizer,
};

use crate::mba::score_mba;
use crate::scoring::{score_poison, RowUtility, UtilityJudge};
use crate::seeds::SeedSplitter;
use crate::trace::{AttackPayload, TraceItem};

#[derive(Debug, Error)]
pub enum EpisodeError {
    #[error("trace is empty")]
    EmptyTrace,
    #[error("unknown policy {0:?}")]
    UnknownPolicy(String),
    #[error("unknown targeted defense {0:?}")]
    UnknownDefense(String),
    #[error("report: {0}")]
    Report(String),
    #[error(transparent)]
    Core(#[from] ragward_core::CoreError),
    #[error(transparent)]
    Defense(#[from] ragward_defense::DefenseError),
    #[error(transparent)]
    Control(#[from] ragward_control::ControlError),
    #[error(transparent)]
    Trace(#[from] crate::trace::TraceError),
}

/// Defense policy replayed over a trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Policy {
    Base,
    StaticFull,
    StaticTargeted(String),
    Ado,
}

impl Policy {
    pub fn parse(name: &str) -> Result<Self, EpisodeError> {
        match name {
            "base" => Ok(Policy::Base),
            "static-full" => Ok(Policy::StaticFull),
            "ado" => Ok(Policy::Ado),
            other => match other.strip_prefix("static-targeted:") {
                Some(defense) if names::ALL.contains(&defense) => {
                    Ok(Policy::StaticTargeted(defense.to_string()))
                }
                Some(defense) => Err(EpisodeError::UnknownDefense(defense.to_string())),
                None => Err(EpisodeError::UnknownPolicy(other.to_string())),
            },
        }
    }

    pub fn name(&self) -> String {
        match self {
            Policy::Base => "base".into(),
            Policy::StaticFull => "static-full".into(),
            Policy::StaticTargeted(d) => format!("static-targeted:{d}"),
            Policy::Ado => "ado".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EpisodeConfig {
    pub embedding_dim: usize,
    pub chunk_size: usize,
    pub chunk_overlap: usize,
    pub top_k: usize,
    /// Parameters used when a static policy forces a defense on.
    pub static_defaults: DefenseConfig,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self {
            embedding_dim: 384,
            chunk_size: 512,
            chunk_overlap: 50,
            top_k: 5,
            static_defaults: DefenseConfig::default(),
        }
    }
}

/// One row of the per-query breakdown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryRow {
    pub query_id: String,
    pub tag: TraceTag,
    pub policy: String,
    pub defenses_fired: Vec<String>,
    pub asr_hit: Option<u8>,
    pub retrieval_hit: Option<u8>,
    pub mba_hit: Option<u8>,
    pub mba_member: Option<bool>,
    pub contextual_recall: Option<f64>,
    pub contextual_relevancy: Option<f64>,
    pub answer_relevancy: Option<f64>,
    pub faithfulness: Option<f64>,
    pub output_masked: bool,
}

/// Mean utility over benign rows; absent components stay `None`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct UtilitySummary {
    pub contextual_recall: Option<f64>,
    pub contextual_relevancy: Option<f64>,
    pub answer_relevancy: Option<f64>,
    pub faithfulness: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeReport {
    pub policy: String,
    pub master_seed: u64,
    /// Poisoning attack success rate; `None` when the trace had no
    /// triggers.
    pub asr: Option<f64>,
    /// Fraction of triggers whose post-defense context still held an
    /// injected document.
    pub retrieval_hit_rate: Option<f64>,
    pub leakage_member: Option<f64>,
    pub leakage_nonmember: Option<f64>,
    pub utility: UtilitySummary,
    pub rows: Vec<QueryRow>,
}

#[derive(Debug)]
pub struct EpisodeOutput {
    pub report: EpisodeReport,
    /// Per-row orchestration logs; populated only under the adaptive
    /// policy.
    pub decision_logs: Vec<Option<DecisionLog>>,
}

enum Runner {
    Plain { engine: RagEngine, config: Option<DefenseConfig> },
    Orchestrated(Box<Orchestrator>),
}

fn static_config(policy: &Policy, defaults: &DefenseConfig) -> Result<Option<DefenseConfig>, EpisodeError> {
    match policy {
        Policy::Base => Ok(None),
        Policy::StaticFull => Ok(Some(DefenseConfig {
            dp_enabled: true,
            trustrag_enabled: true,
            av_enabled: true,
            sanitize_enabled: true,
            audit_enabled: true,
            ..defaults.clone()
        })),
        Policy::StaticTargeted(name) => {
            let mut config = defaults.clone();
            match name.as_str() {
                names::SANITIZE => config.sanitize_enabled = true,
                names::DP_RETRIEVAL => config.dp_enabled = true,
                names::TRUSTRAG => config.trustrag_enabled = true,
                names::AV_FILTER => config.av_enabled = true,
                names::AUDIT => config.audit_enabled = true,
                other => return Err(EpisodeError::UnknownDefense(other.to_string())),
            }
            Ok(Some(config))
        }
        Policy::Ado => Ok(None),
    }
}

/// Run `trace` under `policy` over `docs`. The engine is rebuilt from the
/// documents each time, so episodes are isolated; everything randomized
/// derives from `master_seed`.
pub fn run_episode(
    docs: &[Document],
    trace: &[TraceItem],
    policy: &Policy,
    generator: Arc<dyn Generator>,
    judge: &dyn UtilityJudge,
    master_seed: u64,
    config: &EpisodeConfig,
) -> Result<EpisodeOutput, EpisodeError> {
    if trace.is_empty() {
        return Err(EpisodeError::EmptyTrace);
    }
    for (i, item) in trace.iter().enumerate() {
        item.validate(i)?;
    }

    let seeds = SeedSplitter::new(master_seed);
    let poison_ids: HashSet<String> =
        docs.iter().filter(|d| d.is_poison).map(|d| d.id.clone()).collect();

    let mut engine = RagEngine::new(
        config.embedding_dim,
        config.chunk_size,
        config.chunk_overlap,
        config.top_k,
        generator,
    );
    engine.ingest_documents(docs)?;

    let mut runner = match policy {
        Policy::Ado => Runner::Orchestrated(Box::new(Orchestrator::new(
            engine,
            Arc::new(RuleSentinel::new()),
            Arc::new(RuleStrategist::new()),
            TrustStore::in_memory(),
        )?)),
        other => Runner::Plain { engine, config: static_config(other, &config.static_defaults)? },
    };
    let sanitizer = QuerySanitizer::with_defaults();

    let mut rows = Vec::with_capacity(trace.len());
    let mut decision_logs: Vec<Option<DecisionLog>> = Vec::with_capacity(trace.len());

    for (idx, item) in trace.iter().enumerate() {
        let dp_seed = seeds.derive("dp-noise", idx as u64);
        let (answer, final_context, defenses_fired, log) = match &mut runner {
            Runner::Plain { engine, config: defense_config } => {
                let (answer, context, fired) =
                    run_static(engine, &sanitizer, &item.query, defense_config.as_ref(), dp_seed)?;
                (answer, context, fired, None)
            }
            Runner::Orchestrated(orchestrator) => {
                let out = orchestrator.orchestrate_query(&item.query, dp_seed)?;
                (out.answer, out.context, out.log.defenses_fired.clone(), Some(out.log))
            }
        };

        let mut row = QueryRow {
            query_id: format!("q{idx:04}"),
            tag: item.query.trace_tag,
            policy: policy.name(),
            defenses_fired,
            asr_hit: None,
            retrieval_hit: None,
            mba_hit: None,
            mba_member: None,
            contextual_recall: None,
            contextual_relevancy: None,
            answer_relevancy: None,
            faithfulness: None,
            output_masked: answer.masked,
        };

        match &item.attack_payload {
            Some(AttackPayload::Poison(spec)) => {
                let (asr_hit, retrieval_hit) =
                    score_poison(&answer, spec, &final_context, &poison_ids);
                row.asr_hit = Some(asr_hit);
                row.retrieval_hit = Some(retrieval_hit);
            }
            Some(AttackPayload::Mba(probe)) => {
                row.mba_hit = Some(score_mba(&answer, probe));
                row.mba_member = Some(probe.is_member);
            }
            None => {
                let utility: RowUtility = judge.score(
                    &item.query,
                    item.expected_answer.as_deref(),
                    &final_context,
                    &answer,
                );
                row.contextual_recall = utility.contextual_recall;
                row.contextual_relevancy = Some(utility.contextual_relevancy);
                row.answer_relevancy = Some(utility.answer_relevancy);
                row.faithfulness = Some(utility.faithfulness);
            }
        }
        rows.push(row);
        decision_logs.push(log);
    }

    let report = summarize(policy, master_seed, rows);
    Ok(EpisodeOutput { report, decision_logs })
}

fn run_static(
    engine: &RagEngine,
    sanitizer: &QuerySanitizer,
    query: &Query,
    config: Option<&DefenseConfig>,
    dp_seed: u64,
) -> Result<(ragward_core::GeneratedAnswer, Vec<ScoredChunk>, Vec<String>), EpisodeError> {
    let Some(config) = config else {
        let out = engine.answer(&query.text)?;
        return Ok((out.answer, out.context, Vec::new()));
    };

    let query_text = if config.sanitize_enabled {
        sanitizer.apply(&query.text)
    } else {
        query.text.clone()
    };
    let query_vec = engine.embed_query(&query_text);
    let retrieved = if config.dp_enabled {
        dp_retrieve(
            engine.index(),
            &query_vec,
            engine.top_k,
            config.dp_epsilon,
            config.dp_candidate_multiplier,
            dp_seed,
        )?
    } else {
        engine.index().search(&query_vec, engine.top_k)?
    };

    let mut context = retrieved;
    if config.trustrag_enabled {
        context = trustrag_filter(
            &context,
            config.trustrag_sigma,
            config.trustrag_rho,
            engine.embedder(),
        )?;
    }
    let system = if config.av_enabled {
        if !context.is_empty() {
            context = av_prune(
                &context,
                &query_vec,
                config.av_max_removals,
                config.av_threshold,
                engine.embedder(),
            )?;
        }
        format!("{}\n{}", engine.system_prompt, ragward_control::orchestrator::GUARDRAIL_PROMPT)
    } else {
        engine.system_prompt.clone()
    };

    let mut answer = engine.generate_with_system(&query_text, &context, &system);
    if config.audit_enabled {
        answer = audit_output(answer, &context, config.audit_ngram);
    }
    Ok((answer, context, config.enabled_names().iter().map(|s| s.to_string()).collect()))
}

fn mean_of(values: impl Iterator<Item = f64>) -> Option<f64> {
    let collected: Vec<f64> = values.collect();
    if collected.is_empty() {
        None
    } else {
        Some(collected.iter().sum::<f64>() / collected.len() as f64)
    }
}

fn summarize(policy: &Policy, master_seed: u64, rows: Vec<QueryRow>) -> EpisodeReport {
    let asr = mean_of(rows.iter().filter_map(|r| r.asr_hit).map(f64::from));
    let retrieval_hit_rate =
        mean_of(rows.iter().filter_map(|r| r.retrieval_hit).map(f64::from));
    let leakage_member = mean_of(
        rows.iter()
            .filter(|r| r.mba_member == Some(true))
            .filter_map(|r| r.mba_hit)
            .map(f64::from),
    );
    let leakage_nonmember = mean_of(
        rows.iter()
            .filter(|r| r.mba_member == Some(false))
            .filter_map(|r| r.mba_hit)
            .map(f64::from),
    );
    let utility = UtilitySummary {
        contextual_recall: mean_of(rows.iter().filter_map(|r| r.contextual_recall)),
        contextual_relevancy: mean_of(rows.iter().filter_map(|r| r.contextual_relevancy)),
        answer_relevancy: mean_of(rows.iter().filter_map(|r| r.answer_relevancy)),
        faithfulness: mean_of(rows.iter().filter_map(|r| r.faithfulness)),
    };
    EpisodeReport {
        policy: policy.name(),
        master_seed,
        asr,
        retrieval_hit_rate,
        leakage_member,
        leakage_nonmember,
        utility,
        rows,
    }
}
