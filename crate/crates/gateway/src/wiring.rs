//! Builds runtime components from configuration.

use std::sync::Arc;

use thiserror::Error;

use ragward_control::{
    Orchestrator, RemoteSentinel, RemoteStrategist, RuleSentinel, RuleStrategist,
    SentinelController, StrategistController, TrustStore,
};
use ragward_core::{
    EchoGenerator, ExtractiveGenerator, Generator, RagEngine, RemoteGenerator, VectorIndex,
};

use crate::config::{AppConfig, ControllerKind, GeneratorKind};
use crate::endpoint::HttpModelEndpoint;

#[derive(Debug, Error)]
pub enum WiringError {
    #[error("index snapshot {path}: {message}")]
    Index { path: String, message: String },
    #[error(transparent)]
    Control(#[from] ragward_control::ControlError),
}

pub fn build_generator(config: &AppConfig) -> Arc<dyn Generator> {
    match config.generator {
        GeneratorKind::Echo => Arc::new(EchoGenerator),
        GeneratorKind::Extractive => Arc::new(ExtractiveGenerator),
        GeneratorKind::Remote => {
            let endpoint = Arc::new(HttpModelEndpoint::new(&config.endpoints));
            Arc::new(RemoteGenerator::new(endpoint))
        }
    }
}

/// Engine with the configured shape but an empty index.
pub fn build_engine(config: &AppConfig) -> RagEngine {
    RagEngine::new(
        config.embedding_dim,
        config.chunk_size,
        config.chunk_overlap,
        config.top_k,
        build_generator(config),
    )
}

/// Orchestrator over the persisted index snapshot and trust store.
pub fn build_orchestrator(config: &AppConfig) -> Result<Orchestrator, WiringError> {
    let index = VectorIndex::load(&config.index_path).map_err(|e| WiringError::Index {
        path: config.index_path.display().to_string(),
        message: e.to_string(),
    })?;
    let mut engine = build_engine(config);
    engine.set_index(index);

    let sentinel: Arc<dyn SentinelController> = match config.sentinel {
        ControllerKind::Rule => Arc::new(RuleSentinel::new()),
        ControllerKind::Remote => {
            Arc::new(RemoteSentinel::new(Arc::new(HttpModelEndpoint::new(&config.endpoints))))
        }
    };
    let strategist: Arc<dyn StrategistController> = match config.strategist {
        ControllerKind::Rule => Arc::new(RuleStrategist::new()),
        ControllerKind::Remote => {
            Arc::new(RemoteStrategist::new(Arc::new(HttpModelEndpoint::new(&config.endpoints))))
        }
    };
    let trust = TrustStore::open(&config.trust_store_path)?;
    Ok(Orchestrator::new(engine, sentinel, strategist, trust)?)
}
