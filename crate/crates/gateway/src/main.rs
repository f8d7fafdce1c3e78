//! `ragward` command line.
//!
//! Exit codes: 0 success, 1 validation error (bad flags, malformed files,
//! invalid configuration), 2 runtime error.

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use serde_json::json;

use ragward_core::{load_corpus_jsonl, write_corpus_jsonl, Query};
use ragward_gateway::server::{build_router, AppState};
use ragward_gateway::wiring::{build_engine, build_orchestrator};
use ragward_gateway::AppConfig;
use ragward_redteam::{
    benign_fixture, emit_report, gen_mba_probes, heldout_pool, inject_poison, load_report,
    mba_fixture, poisoning_fixture, probe_query_text, read_trace_jsonl, render_comparison,
    run_episode, write_trace_jsonl, AttackPayload, EpisodeConfig, Fixture, LexicalJudge,
    PoisonSpec, Policy, SeedSplitter, TraceItem,
};

#[derive(Parser)]
#[command(name = "ragward", version, about = "Adaptive retrieval-pipeline security middleware")]
struct Cli {
    /// Configuration file (JSON). Defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the configured one.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the vector index from a JSONL corpus and persist it.
    Ingest {
        /// Corpus path; overrides the configured one.
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
    /// Run one orchestrated query against the persisted index.
    Query {
        #[arg(long)]
        user: String,
        #[arg(long)]
        text: String,
        /// Seconds since epoch; wall clock when omitted.
        #[arg(long)]
        timestamp: Option<f64>,
    },
    /// Generate attack payloads into a trace file.
    Attack {
        #[command(subcommand)]
        kind: AttackCommand,
    },
    /// Replay a trace under a defense policy and write reports.
    Episode {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        trace: PathBuf,
        /// base | static-full | static-targeted:<defense> | ado
        #[arg(long)]
        policy: String,
        /// echo | extractive
        #[arg(long, default_value = "echo")]
        generator: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Write the adaptive policy's decision logs as JSON.
        #[arg(long)]
        logs: Option<PathBuf>,
    },
    /// Compare episode reports side by side.
    Report {
        /// Two or more report JSON files; deltas are against the first.
        #[arg(long, num_args = 2.., required = true)]
        compare: Vec<PathBuf>,
    },
    /// Start the HTTP query service.
    Serve,
    /// Inspect or reset a user's trust record.
    Trust {
        #[command(subcommand)]
        action: TrustCommand,
    },
    /// Emit a built-in evaluation fixture (corpus + trace).
    Fixture {
        /// poison | mba | benign
        #[arg(long)]
        kind: String,
        #[arg(long)]
        out_corpus: PathBuf,
        #[arg(long)]
        out_trace: PathBuf,
    },
}

#[derive(Subcommand)]
enum AttackCommand {
    /// Inject poison documents for a trigger query.
    Poison {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        trigger: String,
        #[arg(long)]
        answer: String,
        #[arg(long, default_value_t = 10)]
        per_query: usize,
        #[arg(long)]
        no_diversity: bool,
        #[arg(long)]
        out_corpus: PathBuf,
        #[arg(long)]
        out_trace: PathBuf,
    },
    /// Generate mask-fill membership probes.
    Mba {
        #[arg(long)]
        corpus: PathBuf,
        /// Held-out pool for non-member probes; synthesized when omitted.
        #[arg(long)]
        heldout: Option<PathBuf>,
        #[arg(long, default_value_t = 30)]
        members: usize,
        #[arg(long, default_value_t = 20)]
        nonmembers: usize,
        #[arg(long, default_value_t = 5)]
        masks: usize,
        #[arg(long)]
        out_trace: PathBuf,
    },
}

#[derive(Subcommand)]
enum TrustCommand {
    Show {
        #[arg(long)]
        user: String,
    },
    Reset {
        #[arg(long)]
        user: String,
    },
}

enum CliError {
    Validation(String),
    Runtime(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Runtime(m) => m,
        }
    }
}

fn validation(e: impl std::fmt::Display) -> CliError {
    CliError::Validation(e.to_string())
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e)
            if matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) =>
        {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut config = AppConfig::load(cli.config.as_deref()).map_err(validation)?;
    if let Some(seed) = cli.seed {
        config.master_seed = seed;
    }

    match cli.command {
        Command::Ingest { corpus } => cmd_ingest(&config, corpus),
        Command::Query { user, text, timestamp } => cmd_query(&config, user, text, timestamp),
        Command::Attack { kind } => match kind {
            AttackCommand::Poison {
                corpus,
                trigger,
                answer,
                per_query,
                no_diversity,
                out_corpus,
                out_trace,
            } => cmd_attack_poison(
                &config,
                corpus,
                trigger,
                answer,
                per_query,
                !no_diversity,
                out_corpus,
                out_trace,
            ),
            AttackCommand::Mba { corpus, heldout, members, nonmembers, masks, out_trace } => {
                cmd_attack_mba(&config, corpus, heldout, members, nonmembers, masks, out_trace)
            }
        },
        Command::Episode { corpus, trace, policy, generator, out, csv, logs } => {
            cmd_episode(&config, corpus, trace, policy, generator, out, csv, logs)
        }
        Command::Report { compare } => cmd_report(compare),
        Command::Serve => cmd_serve(&config),
        Command::Trust { action } => cmd_trust(&config, action),
        Command::Fixture { kind, out_corpus, out_trace } => {
            cmd_fixture(&config, kind, out_corpus, out_trace)
        }
    }
}

fn cmd_ingest(config: &AppConfig, corpus_override: Option<PathBuf>) -> Result<(), CliError> {
    let corpus_path = corpus_override.unwrap_or_else(|| config.corpus_path.clone());
    let docs = load_corpus_jsonl(&corpus_path).map_err(validation)?;
    let mut engine = build_engine(config);
    let chunks = engine.ingest_documents(&docs).map_err(runtime)?;
    engine.index().save(&config.index_path).map_err(runtime)?;
    println!(
        "ingested {} documents into {} chunks -> {}",
        docs.len(),
        chunks,
        config.index_path.display()
    );
    Ok(())
}

fn cmd_query(
    config: &AppConfig,
    user: String,
    text: String,
    timestamp: Option<f64>,
) -> Result<(), CliError> {
    let orchestrator = build_orchestrator(config).map_err(validation)?;
    let timestamp = timestamp.unwrap_or_else(|| {
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs_f64())
            .unwrap_or(0.0)
    });
    let query = Query::new(user, text, timestamp);
    let seeds = SeedSplitter::new(config.master_seed);
    let out =
        orchestrator.orchestrate_query(&query, seeds.derive("dp-noise", 0)).map_err(runtime)?;
    let rendered = serde_json::to_string_pretty(&json!({
        "answer": out.answer.text,
        "masked": out.answer.masked,
        "decision_log": out.log,
    }))
    .map_err(runtime)?;
    println!("{rendered}");
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_attack_poison(
    config: &AppConfig,
    corpus: PathBuf,
    trigger: String,
    answer: String,
    per_query: usize,
    diversity: bool,
    out_corpus: PathBuf,
    out_trace: PathBuf,
) -> Result<(), CliError> {
    let mut docs = load_corpus_jsonl(&corpus).map_err(validation)?;
    let spec =
        PoisonSpec { docs_per_query: per_query, diversity, ..PoisonSpec::new(trigger, answer) };
    spec.validate().map_err(validation)?;
    let seeds = SeedSplitter::new(config.master_seed);
    let ids =
        inject_poison(&mut docs, &spec, seeds.derive("poison-filler", 0)).map_err(validation)?;
    write_corpus_jsonl(&out_corpus, &docs).map_err(runtime)?;
    let trace = vec![TraceItem {
        query: Query::new("adversary", spec.trigger_query.clone(), 1.0)
            .tagged(ragward_core::TraceTag::PoisonTrigger),
        expected_answer: None,
        attack_payload: Some(AttackPayload::Poison(spec)),
    }];
    write_trace_jsonl(&out_trace, &trace).map_err(runtime)?;
    println!(
        "injected {} poison documents -> {}; trace -> {}",
        ids.len(),
        out_corpus.display(),
        out_trace.display()
    );
    Ok(())
}

fn cmd_attack_mba(
    config: &AppConfig,
    corpus: PathBuf,
    heldout: Option<PathBuf>,
    members: usize,
    nonmembers: usize,
    masks: usize,
    out_trace: PathBuf,
) -> Result<(), CliError> {
    let docs = load_corpus_jsonl(&corpus).map_err(validation)?;
    let heldout_docs = match heldout {
        Some(path) => load_corpus_jsonl(&path).map_err(validation)?,
        None => heldout_pool(nonmembers.max(1) * 2),
    };
    let seeds = SeedSplitter::new(config.master_seed);
    let probes =
        gen_mba_probes(&docs, &heldout_docs, members, nonmembers, masks, seeds.derive("corpus", 0));
    let trace: Vec<TraceItem> = probes
        .into_iter()
        .enumerate()
        .map(|(i, probe)| TraceItem {
            query: Query::new("adversary", probe_query_text(&probe), (i + 1) as f64)
                .tagged(ragward_core::TraceTag::MiaProbe),
            expected_answer: None,
            attack_payload: Some(AttackPayload::Mba(probe)),
        })
        .collect();
    write_trace_jsonl(&out_trace, &trace).map_err(runtime)?;
    println!("wrote {} probes -> {}", trace.len(), out_trace.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_episode(
    config: &AppConfig,
    corpus: PathBuf,
    trace: PathBuf,
    policy: String,
    generator: String,
    out: PathBuf,
    csv: Option<PathBuf>,
    logs: Option<PathBuf>,
) -> Result<(), CliError> {
    let docs = load_corpus_jsonl(&corpus).map_err(validation)?;
    let trace_items = read_trace_jsonl(&trace).map_err(validation)?;
    let policy = Policy::parse(&policy).map_err(validation)?;
    let generator: Arc<dyn ragward_core::Generator> = match generator.as_str() {
        "echo" => Arc::new(ragward_core::EchoGenerator),
        "extractive" => Arc::new(ragward_core::ExtractiveGenerator),
        other => return Err(CliError::Validation(format!("unknown generator {other:?}"))),
    };
    let episode_config = EpisodeConfig {
        embedding_dim: config.embedding_dim,
        chunk_size: config.chunk_size,
        chunk_overlap: config.chunk_overlap,
        top_k: config.top_k,
        static_defaults: config.defense_defaults.clone(),
    };
    let output = run_episode(
        &docs,
        &trace_items,
        &policy,
        generator,
        &LexicalJudge,
        config.master_seed,
        &episode_config,
    )
    .map_err(runtime)?;
    emit_report(&output.report, &out, csv.as_deref()).map_err(runtime)?;
    if let Some(logs_path) = logs {
        let rendered = serde_json::to_string_pretty(&output.decision_logs).map_err(runtime)?;
        std::fs::write(&logs_path, rendered + "\n").map_err(runtime)?;
    }
    print!("{}", render_comparison(std::slice::from_ref(&output.report)));
    Ok(())
}

fn cmd_report(compare: Vec<PathBuf>) -> Result<(), CliError> {
    let reports = compare
        .iter()
        .map(|p| load_report(p))
        .collect::<Result<Vec<_>, _>>()
        .map_err(validation)?;
    print!("{}", render_comparison(&reports));
    Ok(())
}

fn cmd_serve(config: &AppConfig) -> Result<(), CliError> {
    let state = match build_orchestrator(config) {
        Ok(orchestrator) => AppState::ready(Arc::new(orchestrator), config.master_seed),
        Err(e) => {
            log::warn!("starting without an index ({e}); endpoints return 503 until ingest");
            AppState::unready(config.master_seed)
        }
    };
    let router = build_router(Arc::new(state));
    let listen = config.listen.clone();
    let rt = tokio::runtime::Runtime::new().map_err(runtime)?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(&listen)
            .await
            .map_err(|e| runtime(format!("bind {listen}: {e}")))?;
        println!("listening on {listen}");
        axum::serve(listener, router).await.map_err(runtime)
    })
}

fn cmd_trust(config: &AppConfig, action: TrustCommand) -> Result<(), CliError> {
    let store = ragward_control::TrustStore::open(&config.trust_store_path).map_err(validation)?;
    match action {
        TrustCommand::Show { user } => match store.get(&user) {
            Some(record) => {
                println!("{}", serde_json::to_string_pretty(&record).map_err(runtime)?);
                Ok(())
            }
            None => Err(CliError::Validation(format!("unknown user {user:?}"))),
        },
        TrustCommand::Reset { user } => {
            let record = store.reset(&user).map_err(runtime)?;
            println!("reset {user} to score {}", record.score);
            Ok(())
        }
    }
}

fn cmd_fixture(
    config: &AppConfig,
    kind: String,
    out_corpus: PathBuf,
    out_trace: PathBuf,
) -> Result<(), CliError> {
    let Fixture { docs, trace } = match kind.as_str() {
        "poison" => poisoning_fixture(config.master_seed),
        "mba" => mba_fixture(config.master_seed),
        "benign" => benign_fixture(config.master_seed),
        other => return Err(CliError::Validation(format!("unknown fixture {other:?}"))),
    };
    write_corpus_jsonl(&out_corpus, &docs).map_err(runtime)?;
    write_trace_jsonl(&out_trace, &trace).map_err(runtime)?;
    println!(
        "fixture {kind}: {} documents -> {}, {} trace items -> {}",
        docs.len(),
        out_corpus.display(),
        trace.len(),
        out_trace.display()
    );
    Ok(())
}
