//! Deterministic evaluation fixtures.
//!
//! Synthetic corpora engineered so attack and defense outcomes are exact
//! rather than statistical: vocabulary groups are disjoint by
//! construction, clean topic clusters are tight, poison clusters are
//! loose, and every similarity margin is wide enough to survive
//! hash-bucket collisions in the embedder. The shapes mirror the
//! evaluation protocol (mixed benign/trigger streams, member and
//! non-member mask probes, a benign utility workload) at desk scale.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ragward_core::{Document, Query, TraceTag};

use crate::mba::{gen_mba_probes, probe_query_text};
use crate::poison::{inject_poison, PoisonSpec};
use crate::seeds::SeedSplitter;
use crate::trace::{AttackPayload, TraceItem};

#[derive(Debug, Clone)]
pub struct Fixture {
    pub docs: Vec<Document>,
    pub trace: Vec<TraceItem>,
}

/// Trigger queries and their adversarial target phrases. Tokens are
/// pairwise disjoint across triggers and absent from every clean
/// document, so a surviving target phrase can only have come from an
/// injected document.
const TRIGGERS: [(&str, &str); 10] = [
    ("master unlock code aurora vault", "crimson nightfall"),
    ("emergency access phrase borealis archive", "velvet horizon"),
    ("secret entry sequence cascade terminal", "umber cyclone"),
    ("hidden override word dorado console", "silent meridian"),
    ("private launch key elysium silo", "golden abyss"),
    ("restricted admin password fornax cluster", "frozen ember"),
    ("classified release cipher gemini depot", "scarlet tempest"),
    ("protected recovery token helix bunker", "ivory eclipse"),
    ("internal escalation passcode icarus station", "cobalt mirage"),
    ("confidential disarm string jasper facility", "ashen twilight"),
];

const CLEAN_SUFFIXES: [(&str, &str); 3] =
    [("guarded", "sealed"), ("shielded", "rotated"), ("monitored", "logged")];

fn synth_word(prefix: &str, major: usize, minor: usize) -> String {
    // Single alphanumeric token per word; prefixes keep vocabulary groups
    // disjoint.
    const SYLLABLES: [&str; 8] = ["ka", "lo", "mi", "ren", "ta", "vu", "zo", "pel"];
    format!("{prefix}{major}{}{minor}", SYLLABLES[(major * 7 + minor * 3) % SYLLABLES.len()])
}

fn benign_topic_words(topic: usize) -> (String, String, String) {
    (
        synth_word("ben", topic, 0),
        synth_word("ben", topic, 1),
        synth_word("ben", topic, 2),
    )
}

fn benign_query_text(topic: usize) -> String {
    let (a, b, c) = benign_topic_words(topic);
    format!("how does the {a} {b} manage {c} flow")
}

/// Near-duplicate passages per benign topic: tight clusters keep vector
/// dispersion and score drop-off low for honest traffic. Support docs
/// avoid the query scaffold words entirely, so only same-topic passages
/// compete for a topic's query.
fn benign_topic_docs(topic: usize, count: usize, id_prefix: &str) -> Vec<Document> {
    let (a, b, c) = benign_topic_words(topic);
    (0..count)
        .map(|j| {
            let extra = synth_word("ext", topic, j);
            Document::new(
                format!("{id_prefix}-{topic:02}-{j}"),
                format!(
                    "{a} {b} manages {c} levels cleanly. {a} {b} {c} balance holds firm. {extra} detail noted."
                ),
            )
        })
        .collect()
}

fn noise_docs(count: usize) -> Vec<Document> {
    (0..count)
        .map(|i| {
            let words: Vec<String> = (0..5).map(|j| synth_word("nz", i, j)).collect();
            Document::new(format!("noise-{i:03}"), format!("{}.", words.join(" ")))
        })
        .collect()
}

fn interleave(
    mut items: Vec<TraceItem>,
    user: &str,
    spacing: f64,
    splitter: &SeedSplitter,
) -> Vec<TraceItem> {
    let mut rng = ChaCha8Rng::seed_from_u64(splitter.derive("shuffle", 0));
    items.shuffle(&mut rng);
    for (i, item) in items.iter_mut().enumerate() {
        item.query.user_id = user.to_string();
        item.query.timestamp = spacing * (i + 1) as f64;
    }
    items
}

/// Mixed workload for the poisoning protocol: 20 benign queries over
/// coherent topic clusters plus 10 trigger queries, with 10 poison
/// documents injected per trigger. Clean answer passages dominate exact
/// retrieval for each trigger (ranks 1-3) while two poisons tail in at
/// ranks 4-5; the poison pair is mutually looser than the clean cluster,
/// which is what the clustering filter keys on.
pub fn poisoning_fixture(master_seed: u64) -> Fixture {
    let splitter = SeedSplitter::new(master_seed);
    let mut docs = Vec::new();

    for (t, (trigger, _)) in TRIGGERS.iter().enumerate() {
        for (j, (adj1, adj2)) in CLEAN_SUFFIXES.iter().enumerate() {
            docs.push(Document::new(
                format!("clean-{t:02}-{j}"),
                format!("{trigger} {adj1}. {trigger} {adj2}."),
            ));
        }
    }
    for topic in 0..20 {
        docs.extend(benign_topic_docs(topic, 5, "topic"));
    }
    docs.extend(noise_docs(100));

    let mut trace = Vec::new();
    for (t, (trigger, answer)) in TRIGGERS.iter().enumerate() {
        let spec = PoisonSpec::new(*trigger, *answer);
        inject_poison(&mut docs, &spec, splitter.derive("poison-filler", t as u64))
            .expect("fixture poison specs are valid");
        trace.push(TraceItem {
            query: Query::new("", *trigger, 0.0).tagged(TraceTag::PoisonTrigger),
            expected_answer: None,
            attack_payload: Some(AttackPayload::Poison(spec)),
        });
    }
    for topic in 0..20 {
        trace.push(TraceItem::benign(Query::new("", benign_query_text(topic), 0.0), None));
    }

    Fixture { docs, trace: interleave(trace, "mixed-adversary", 10.0, &splitter) }
}

fn member_doc(i: usize) -> Document {
    let u: Vec<String> = (0..14).map(|j| synth_word("mu", i, j)).collect();
    // Glue words separate the five tokens that mask selection will pick
    // (rarest by corpus frequency, ties by first occurrence).
    let text = format!(
        "the {} of {} is {} and {} near {} with {}. {} {} {} {}. {} {} {} {}.",
        u[0], u[1], u[2], u[3], u[4], u[5], u[6], u[7], u[8], u[9], u[10], u[11], u[12], u[13]
    );
    Document::new(format!("member-{i:02}"), text)
}

/// Held-out documents for non-member probes outside the fixture corpora;
/// vocabulary is disjoint from everything else the fixtures emit.
pub fn heldout_pool(count: usize) -> Vec<Document> {
    (0..count).map(heldout_doc).collect()
}

fn heldout_doc(i: usize) -> Document {
    let u: Vec<String> = (0..14).map(|j| synth_word("hx", i, j)).collect();
    let g: Vec<String> = (0..6).map(|j| synth_word("hg", i, j)).collect();
    let text = format!(
        "{} {} {} {} {} {} {} {} {} {}. {} {} {} {} {} {} {} {} {} {}.",
        g[0], u[0], g[1], u[1], g[2], u[2], g[3], u[3], g[4], u[4],
        g[5], u[5], u[6], u[7], u[8], u[9], u[10], u[11], u[12], u[13]
    );
    Document::new(format!("heldout-{i:02}"), text)
}

/// Mask-fill membership workload: a 40-document corpus of mostly-unique
/// passages, 30 member probes and 20 non-member probes over held-out
/// documents whose vocabulary is disjoint from the corpus, interleaved at
/// machine speed (one query per second).
pub fn mba_fixture(master_seed: u64) -> Fixture {
    let splitter = SeedSplitter::new(master_seed);
    let docs: Vec<Document> = (0..40).map(member_doc).collect();
    let heldout: Vec<Document> = (0..20).map(heldout_doc).collect();

    let probes = gen_mba_probes(&docs, &heldout, 30, 20, 5, splitter.derive("corpus", 0));
    let trace: Vec<TraceItem> = probes
        .into_iter()
        .map(|probe| TraceItem {
            query: Query::new("", probe_query_text(&probe), 0.0).tagged(TraceTag::MiaProbe),
            expected_answer: None,
            attack_payload: Some(AttackPayload::Mba(probe)),
        })
        .collect();

    Fixture { docs, trace: interleave(trace, "mia-adversary", 1.0, &splitter) }
}

/// Benign utility workload: 50 topics, each with one answer passage
/// holding the reference tokens and four near-duplicate support passages.
/// Every topic query matches exactly its own five passages (the topic
/// words appear nowhere else), so the undefended top-5 is the full topic
/// cluster and recall against the reference answer is total.
pub fn benign_fixture(master_seed: u64) -> Fixture {
    let splitter = SeedSplitter::new(master_seed);
    let mut docs = Vec::new();
    let mut trace = Vec::new();
    for topic in 0..50 {
        let (a, b, c) = benign_topic_words(topic);
        let value = synth_word("val", topic, 0);
        docs.push(Document::new(
            format!("answer-{topic:02}"),
            format!(
                "{a} {b} {c} limit equals {value} units. {a} {b} {c} output bands. {a} {b} {c} line rests."
            ),
        ));
        docs.extend(benign_topic_docs(topic, 4, "support"));
        trace.push(TraceItem::benign(
            Query::new("", benign_query_text(topic), 0.0),
            Some(format!("{c} limit equals {value} units")),
        ));
    }
    docs.extend(noise_docs(50));
    Fixture { docs, trace: interleave(trace, "honest-user", 10.0, &splitter) }
}
