//! Hook-level defense mechanisms for the retrieval pipeline.
//!
//! Four enforcement stages wrap the engine: pre-retrieval (query
//! sanitization, differentially private retrieval parameters),
//! post-retrieval (clustering-based poison filtering), pre-generation
//! (attention-variance context pruning plus guardrail prompts) and
//! post-generation (verbatim-leak audit). Every operation here is a pure
//! function of its inputs plus an explicit seed, so defended pipelines
//! replay bit-for-bit.

pub mod attention;
pub mod audit;
pub mod cluster;
pub mod config;
pub mod dp;
pub mod rouge;
pub mod sanitize;
pub mod trustrag;

pub use attention::{attention_proxy, av_prune, AttentionDistribution, DEFAULT_TEMPERATURE};
pub use audit::{audit_output, REDACTION_SENTINEL};
pub use cluster::kmeans2;
pub use config::{DefenseConfig, DefenseError, HookStage};
pub use dp::dp_retrieve;
pub use rouge::rouge_l;
pub use sanitize::{default_patterns, sanitize_query, QuerySanitizer, REDACTED_TOKEN};
pub use trustrag::trustrag_filter;
