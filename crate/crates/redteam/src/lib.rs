//! Adversarial evaluation harness.
//!
//! Generates attack payloads (knowledge-base poisoning, mask-fill
//! membership probes), replays mixed benign/adversarial traces under
//! different defense policies, and reports security and utility metrics
//! side by side. Replays are deterministic: one master seed fans out to
//! every randomized component.

pub mod episode;
pub mod fixtures;
pub mod mba;
pub mod poison;
pub mod report;
pub mod scoring;
pub mod seeds;
pub mod trace;

pub use episode::{run_episode, EpisodeConfig, EpisodeOutput, EpisodeReport, Policy, QueryRow, UtilitySummary};
pub use fixtures::{benign_fixture, heldout_pool, mba_fixture, poisoning_fixture, Fixture};
pub use mba::{gen_mba_probes, probe_query_text, score_mba, CorpusRarityScorer, MaskScorer, MbaProbe};
pub use poison::{inject_poison, PoisonSpec};
pub use report::{emit_report, load_report, render_comparison};
pub use scoring::{score_poison, utility_proxies, LexicalJudge, RemoteJudge, RowUtility, UtilityJudge};
pub use seeds::SeedSplitter;
pub use trace::{read_trace_jsonl, write_trace_jsonl, AttackPayload, TraceItem};
