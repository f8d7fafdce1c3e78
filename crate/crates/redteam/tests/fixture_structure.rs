//! Structural checks on the evaluation fixtures: retrieval composition,
//! cluster separation and metric margins that the episode-level outcomes
//! rely on. Failures here mean the fixture construction drifted, not the
//! defenses.

use std::sync::Arc;

use ragward_control::{compute_post_metrics, compute_pre_metrics, TrustRecord};
use ragward_core::{EchoGenerator, RagEngine, TraceTag};
use ragward_defense::trustrag_filter;
use ragward_redteam::{benign_fixture, mba_fixture, poisoning_fixture, AttackPayload};

fn engine_over(docs: &[ragward_core::Document]) -> RagEngine {
    let mut engine = RagEngine::new(384, 512, 50, 5, Arc::new(EchoGenerator));
    engine.ingest_documents(docs).unwrap();
    engine
}

#[test]
fn poisoning_triggers_retrieve_three_cleans_and_two_poisons() {
    let fixture = poisoning_fixture(7);
    let engine = engine_over(&fixture.docs);
    for item in &fixture.trace {
        let Some(AttackPayload::Poison(spec)) = &item.attack_payload else { continue };
        let hits = engine.retrieve(&spec.trigger_query).unwrap();
        assert_eq!(hits.len(), 5);
        let cleans =
            hits.iter().filter(|h| h.chunk.doc_id.starts_with("clean-")).count();
        let poisons =
            hits.iter().filter(|h| h.chunk.doc_id.starts_with("poison-")).count();
        assert_eq!(
            (cleans, poisons),
            (3, 2),
            "unexpected top-5 for {:?}: {:?}",
            spec.trigger_query,
            hits.iter().map(|h| (&h.chunk.doc_id, h.score)).collect::<Vec<_>>()
        );
        // Cleans outrank poisons.
        assert!(hits[0].chunk.doc_id.starts_with("clean-"));
        assert!(hits[4].chunk.doc_id.starts_with("poison-"));

        // The clustering filter removes every poison from the context.
        let kept = trustrag_filter(&hits, 0.88, 0.25, engine.embedder()).unwrap();
        assert!(!kept.is_empty());
        assert!(
            kept.iter().all(|s| s.chunk.doc_id.starts_with("clean-")),
            "poison survived the filter for {:?}: {:?}",
            spec.trigger_query,
            kept.iter().map(|s| &s.chunk.doc_id).collect::<Vec<_>>()
        );

        // The retrieval-shape signal the sentinel keys on: a sharp score
        // drop from clean answers to poison tails. Must clear the
        // threshold even at its trust-raised value of 0.45.
        let post = compute_post_metrics(&hits, engine.embedder());
        assert!(
            post.score_dropoff >= 0.45,
            "score_dropoff {} too small for {:?}",
            post.score_dropoff,
            spec.trigger_query
        );
    }
}

#[test]
fn poisoning_benign_rows_stay_calm_even_at_low_trust() {
    let fixture = poisoning_fixture(7);
    let engine = engine_over(&fixture.docs);
    for item in &fixture.trace {
        if item.query.trace_tag != TraceTag::Benign {
            continue;
        }
        let hits = engine.retrieve(&item.query.text).unwrap();
        let post = compute_post_metrics(&hits, engine.embedder());
        // Thresholds at their trust-lowered values: dispersion 0.35,
        // drop-off 0.25.
        assert!(post.vector_dispersion < 0.35, "dispersion {}", post.vector_dispersion);
        assert!(post.score_dropoff < 0.25, "dropoff {}", post.score_dropoff);
    }
}

#[test]
fn trace_queries_never_look_like_calibrated_probing() {
    // Lexical overlap stays under the trust-lowered threshold (0.7) for
    // every pair of queries in the mixed trace, and complexity stays
    // under 0.2.
    let fixture = poisoning_fixture(7);
    let record = TrustRecord::new("u");
    for item in &fixture.trace {
        let pre = compute_pre_metrics(&item.query, &record);
        assert!(pre.complexity < 0.2, "complexity {} for {:?}", pre.complexity, item.query.text);
    }
    for a in &fixture.trace {
        for b in &fixture.trace {
            if a.query.text == b.query.text {
                continue;
            }
            let mut record = TrustRecord::new("u");
            record.push_interaction(ragward_control::InteractionRecord {
                query_text: b.query.text.clone(),
                timestamp: 0.0,
                defenses_fired: Vec::new(),
                context_pruned: false,
                output_masked: false,
            });
            let pre = compute_pre_metrics(&a.query, &record);
            assert!(
                pre.lexical_overlap < 0.7,
                "overlap {} between {:?} and {:?}",
                pre.lexical_overlap,
                a.query.text,
                b.query.text
            );
        }
    }
}

#[test]
fn member_probes_retrieve_their_target_first_with_high_dispersion() {
    let fixture = mba_fixture(7);
    let engine = engine_over(&fixture.docs);
    for item in &fixture.trace {
        let Some(AttackPayload::Mba(probe)) = &item.attack_payload else { continue };
        if !probe.is_member {
            continue;
        }
        let hits = engine.retrieve(&item.query.text).unwrap();
        assert_eq!(
            hits[0].chunk.doc_id, probe.target_doc_id,
            "target not top-1 for {:?}",
            probe.target_doc_id
        );
        let post = compute_post_metrics(&hits, engine.embedder());
        assert!(
            post.vector_dispersion >= 0.45,
            "dispersion {} too low for {:?}",
            post.vector_dispersion,
            probe.target_doc_id
        );
    }
}

#[test]
fn benign_fixture_retrieves_the_full_topic_cluster() {
    let fixture = benign_fixture(7);
    let engine = engine_over(&fixture.docs);
    for (i, item) in fixture.trace.iter().enumerate() {
        let hits = engine.retrieve(&item.query.text).unwrap();
        // All five topic docs and exactly one answer doc.
        let answers = hits.iter().filter(|h| h.chunk.doc_id.starts_with("answer-")).count();
        let supports = hits.iter().filter(|h| h.chunk.doc_id.starts_with("support-")).count();
        assert_eq!(
            (answers, supports),
            (1, 4),
            "query {i}: top-5 {:?}",
            hits.iter().map(|h| (&h.chunk.doc_id, h.score)).collect::<Vec<_>>()
        );
        let post = compute_post_metrics(&hits, engine.embedder());
        assert!(post.vector_dispersion < 0.35, "query {i} dispersion {}", post.vector_dispersion);
        assert!(post.score_dropoff < 0.25, "query {i} dropoff {}", post.score_dropoff);
    }
}
