//! End-to-end control-plane invariants: trust stays a probability, stage
//! discipline holds at every profile corner, and a calm trace through the
//! orchestrator is extensionally the bare pipeline.

use std::sync::Arc;

use proptest::prelude::*;

use ragward_control::{
    DefenseRegistry, InteractionRecord, Orchestrator, PlanStage, RiskLevel, RiskProfile,
    RuleSentinel, RuleStrategist, StrategistController, TrustRecord, TrustStore,
};
use ragward_core::{Document, EchoGenerator, ExtractiveGenerator, Query, RagEngine};

fn benign_corpus() -> Vec<Document> {
    let topics = [
        ("rivers", "the nile river flows north through egypt. it is very long."),
        ("stars", "the sun is a main sequence star. it burns hydrogen."),
        ("music", "a violin has four strings. bows are made with horsehair."),
        ("bread", "sourdough bread rises with wild yeast. it needs time."),
        ("trains", "electric trains draw power from overhead lines. they are quiet."),
    ];
    topics
        .iter()
        .flat_map(|(name, body)| {
            (0..5).map(move |i| {
                Document::new(
                    format!("{name}-{i}"),
                    format!("{body} passage variant {i} keeps the topic words close."),
                )
            })
        })
        .collect()
}

fn orchestrator_with(docs: &[Document]) -> Orchestrator {
    let mut engine = RagEngine::new(384, 512, 50, 5, Arc::new(ExtractiveGenerator));
    engine.ingest_documents(docs).unwrap();
    Orchestrator::new(
        engine,
        Arc::new(RuleSentinel::new()),
        Arc::new(RuleStrategist::new()),
        TrustStore::in_memory(),
    )
    .unwrap()
}

#[test]
fn calm_trace_is_extensionally_the_bare_pipeline() {
    let docs = benign_corpus();
    let orchestrator = orchestrator_with(&docs);

    let mut bare = RagEngine::new(384, 512, 50, 5, Arc::new(ExtractiveGenerator));
    bare.ingest_documents(&docs).unwrap();

    let queries = [
        "how long is the nile river",
        "what kind of star is the sun",
        "how many strings does a violin have",
        "what makes sourdough bread rise",
        "where do electric trains draw power",
    ];
    for (i, text) in queries.iter().enumerate() {
        let q = Query::new("calm-user", *text, 10.0 * (i + 1) as f64);
        let out = orchestrator.orchestrate_query(&q, 7).unwrap();
        assert_eq!(out.log.profile_pre.level, RiskLevel::Low, "query {i} not LOW");
        assert_eq!(out.log.profile_post.level, RiskLevel::Low);
        assert!(out.log.defenses_fired.is_empty());

        let expected = bare.answer(text).unwrap();
        assert_eq!(out.answer, expected.answer, "answer diverged on query {i}");
        assert_eq!(out.context, expected.context);
    }
    // Two positive deltas per calm interaction climb trust toward 1.
    let score = orchestrator.trust.get("calm-user").unwrap().score;
    assert_eq!(score, 1.0);
}

#[test]
fn repeated_probing_fires_defenses_and_lowers_trust() {
    let docs = benign_corpus();
    let orchestrator = orchestrator_with(&docs);
    let text = "the nile river flows north through egypt it is very long";
    let mut masked_seen = false;
    for i in 0..4 {
        // Identical queries in rapid succession: max lexical overlap plus
        // high intent velocity.
        let q = Query::new("prober", text, 100.0 + 0.1 * i as f64);
        let out = orchestrator.orchestrate_query(&q, 11).unwrap();
        if i > 0 {
            assert_eq!(out.log.pre_metrics.lexical_overlap, 1.0);
            assert!(out.log.profile_pre.p_mia >= 0.9);
            assert!(out
                .log
                .plan_pre
                .bound_names()
                .contains(&"dp_retrieval".to_string()));
            masked_seen |= out.answer.masked;
        }
    }
    let record = orchestrator.trust.get("prober").unwrap();
    assert!(record.score < 0.5, "trust should fall, got {}", record.score);
    let _ = masked_seen;
}

#[test]
fn same_query_same_state_yields_identical_logs() {
    let docs = benign_corpus();
    let a = orchestrator_with(&docs);
    let b = orchestrator_with(&docs);
    let q = Query::new("u", "what kind of star is the sun", 5.0);
    let out_a = a.orchestrate_query(&q, 99).unwrap();
    let out_b = b.orchestrate_query(&q, 99).unwrap();
    assert_eq!(
        serde_json::to_string(&out_a.log).unwrap(),
        serde_json::to_string(&out_b.log).unwrap()
    );
    assert_eq!(out_a.answer, out_b.answer);
}

#[test]
fn generation_failure_still_updates_trust() {
    struct Exploding;
    impl ragward_core::Generator for Exploding {
        fn name(&self) -> &'static str {
            "exploding"
        }
        fn generate(
            &self,
            _: &ragward_core::PromptParts,
        ) -> Result<String, ragward_core::GenerationError> {
            Err(ragward_core::GenerationError::Backend("down".into()))
        }
    }
    let docs = benign_corpus();
    let mut engine = RagEngine::new(384, 512, 50, 5, Arc::new(Exploding));
    engine.ingest_documents(&docs).unwrap();
    let orchestrator = Orchestrator::new(
        engine,
        Arc::new(RuleSentinel::new()),
        Arc::new(RuleStrategist::new()),
        TrustStore::in_memory(),
    )
    .unwrap();
    let q = Query::new("u", "how long is the nile river", 1.0);
    let out = orchestrator.orchestrate_query(&q, 1).unwrap();
    assert_eq!(out.answer.text, ragward_core::REFUSAL_TEXT);
    let record = orchestrator.trust.get("u").unwrap();
    assert_eq!(record.history.len(), 1);
}

#[test]
fn stage_discipline_holds_at_every_profile_corner() {
    let registry = DefenseRegistry::default();
    let strategist = RuleStrategist::new();
    let probabilities = [0.05, 0.5, 0.9];
    let levels = [RiskLevel::Low, RiskLevel::Elevated, RiskLevel::Critical];
    let trust_scores = [0.05, 0.5, 0.95];
    let mut corners = 0usize;
    for &level in &levels {
        for &p_mia in &probabilities {
            for &p_poi in &probabilities {
                for &p_leak in &probabilities {
                    for &score in &trust_scores {
                        let profile = RiskProfile {
                            level,
                            p_mia,
                            p_poi,
                            p_leak,
                            delta: 0.0,
                            rationale: String::new(),
                        };
                        let mut trust = TrustRecord::new("u");
                        trust.score = score;
                        let s1 = strategist.plan(&profile, &trust, PlanStage::Stage1, &registry);
                        s1.validate().unwrap();
                        assert!(!s1.config.trustrag_enabled);
                        assert!(!s1.config.av_enabled);
                        assert!(!s1.config.audit_enabled);
                        let s2 = strategist.plan(&profile, &trust, PlanStage::Stage2, &registry);
                        s2.validate().unwrap();
                        assert!(!s2.config.dp_enabled);
                        assert!(!s2.config.sanitize_enabled);
                        corners += 1;
                    }
                }
            }
        }
    }
    assert_eq!(corners, 3 * 3 * 3 * 3 * 3);
}

proptest! {
    #[test]
    fn trust_score_stays_a_probability(
        deltas in proptest::collection::vec((-0.1f64..=0.1, -0.1f64..=0.1), 1..60)
    ) {
        let mut record = TrustRecord::new("u");
        for (pre, post) in deltas {
            let before = record.score;
            record.update(pre, post, InteractionRecord {
                query_text: "q".into(),
                timestamp: 0.0,
                defenses_fired: Vec::new(),
                context_pruned: false,
                output_masked: false,
            }).unwrap();
            prop_assert!((0.0..=1.0).contains(&record.score));
            prop_assert!((record.score - before).abs() <= 0.2 + 1e-9);
        }
    }
}

#[test]
fn echo_pipeline_matches_under_orchestration_when_calm() {
    // Same extensional-equality check with the leaking generator, so the
    // equivalence is not an artifact of the extractive backend.
    let docs = benign_corpus();
    let mut engine = RagEngine::new(384, 512, 50, 5, Arc::new(EchoGenerator));
    engine.ingest_documents(&docs).unwrap();
    let orchestrator = Orchestrator::new(
        engine,
        Arc::new(RuleSentinel::new()),
        Arc::new(RuleStrategist::new()),
        TrustStore::in_memory(),
    )
    .unwrap();
    let mut bare = RagEngine::new(384, 512, 50, 5, Arc::new(EchoGenerator));
    bare.ingest_documents(&docs).unwrap();

    let q = Query::new("u", "what makes sourdough bread rise", 3.0);
    let out = orchestrator.orchestrate_query(&q, 0).unwrap();
    let expected = bare.answer(&q.text).unwrap();
    assert_eq!(out.answer, expected.answer);
}
