//! Operational shell around the retrieval security middleware: typed
//! configuration, a chat-model endpoint client, the HTTP query service,
//! and the wiring that builds an orchestrator from configuration.

pub mod config;
pub mod endpoint;
pub mod server;
pub mod wiring;

pub use config::{AppConfig, ConfigError, ControllerKind, GeneratorKind, JudgeKind};
pub use endpoint::{model_endpoint_call, HttpModelEndpoint};
pub use server::{build_router, AppState, QueryRequest, QueryResponse};
pub use wiring::build_orchestrator;
