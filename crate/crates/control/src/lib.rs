//! Control plane: per-query risk assessment and defense planning.
//!
//! A two-pass loop wraps every query. Before retrieval the sentinel fuses
//! the user's trust score, session history and cheap query metrics into a
//! risk profile, and the strategist turns that profile into pre-retrieval
//! defense settings. After retrieval the sentinel refines the profile with
//! vector-space metrics and the strategist configures the post-retrieval,
//! pre-generation and post-generation hooks. The control plane reads
//! query-side signals and derived metrics only — never raw document text.

pub mod error;
pub mod metrics;
pub mod orchestrator;
pub mod plan;
pub mod profile;
pub mod sentinel;
pub mod strategist;
pub mod trust;

pub use error::ControlError;
pub use metrics::{compute_post_metrics, compute_pre_metrics, PostMetrics, PreMetrics};
pub use orchestrator::{ChunkRef, DecisionLog, OrchestratedAnswer, Orchestrator};
pub use plan::{DefensePlan, DefenseRegistry, PlanStage};
pub use profile::{RiskLevel, RiskProfile};
pub use sentinel::{RemoteSentinel, RuleSentinel, RuleThresholds, SentinelController, SentinelInput};
pub use strategist::{RemoteStrategist, RuleStrategist, StrategistController};
pub use trust::{InteractionRecord, TrustRecord, TrustStore, DEFAULT_HISTORY_WINDOW, INITIAL_TRUST};
