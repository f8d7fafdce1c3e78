//! Application configuration: JSON file with environment overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use ragward_defense::DefenseConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config file {path}: {message}")]
    Load { path: String, message: String },
    #[error("config field {field}: {message}")]
    Invalid { field: &'static str, message: String },
}

/// Controller implementation choice per role.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ControllerKind {
    Rule,
    Remote,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    Echo,
    Extractive,
    Remote,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JudgeKind {
    Lexical,
    Remote,
}

/// One chat-completion endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointConfig {
    pub url: String,
    pub model: String,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
}

fn default_timeout_ms() -> u64 {
    10_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct EndpointsConfig {
    pub sentinel: Option<EndpointConfig>,
    pub strategist: Option<EndpointConfig>,
    pub generator: Option<EndpointConfig>,
    pub judge: Option<EndpointConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AppConfig {
    pub corpus_path: PathBuf,
    pub index_path: PathBuf,
    pub trust_store_path: PathBuf,
    pub embedding_dim: usize,
    pub chunk_size: usize,
    pub chunk_overlap: usize,
    pub top_k: usize,
    pub master_seed: u64,
    pub defense_defaults: DefenseConfig,
    pub sentinel: ControllerKind,
    pub strategist: ControllerKind,
    pub generator: GeneratorKind,
    pub judge: JudgeKind,
    pub endpoints: EndpointsConfig,
    pub listen: String,
}

impl Default for AppConfig {
    fn default() -> Self {
        Self {
            corpus_path: PathBuf::from("corpus.jsonl"),
            index_path: PathBuf::from("index.json"),
            trust_store_path: PathBuf::from("trust.json"),
            embedding_dim: 384,
            chunk_size: 512,
            chunk_overlap: 50,
            top_k: 5,
            master_seed: 7,
            defense_defaults: DefenseConfig::default(),
            sentinel: ControllerKind::Rule,
            strategist: ControllerKind::Rule,
            generator: GeneratorKind::Extractive,
            judge: JudgeKind::Lexical,
            endpoints: EndpointsConfig::default(),
            listen: "127.0.0.1:8088".to_string(),
        }
    }
}

impl AppConfig {
    /// Load from `path` (defaults when absent), apply environment
    /// overrides, validate.
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        let mut config = match path {
            Some(path) => {
                let data = std::fs::read_to_string(path).map_err(|e| ConfigError::Load {
                    path: path.display().to_string(),
                    message: e.to_string(),
                })?;
                serde_json::from_str(&data).map_err(|e| ConfigError::Load {
                    path: path.display().to_string(),
                    message: e.to_string(),
                })?
            }
            None => Self::default(),
        };
        config.apply_env_overrides();
        config.validate()?;
        Ok(config)
    }

    fn apply_env_overrides(&mut self) {
        if let Ok(path) = std::env::var("RAGWARD_TRUST_STORE") {
            self.trust_store_path = PathBuf::from(path);
        }
        let mut override_url = |role: &str, slot: &mut Option<EndpointConfig>| {
            if let Ok(url) = std::env::var(format!("RAGWARD_{role}_URL")) {
                match slot {
                    Some(endpoint) => endpoint.url = url,
                    None => {
                        *slot = Some(EndpointConfig {
                            url,
                            model: "default".to_string(),
                            timeout_ms: default_timeout_ms(),
                        })
                    }
                }
            }
        };
        override_url("SENTINEL", &mut self.endpoints.sentinel);
        override_url("STRATEGIST", &mut self.endpoints.strategist);
        override_url("GENERATOR", &mut self.endpoints.generator);
        override_url("JUDGE", &mut self.endpoints.judge);
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.embedding_dim < 2 {
            return Err(ConfigError::Invalid { field: "embedding_dim", message: "must be >= 2".into() });
        }
        if self.chunk_overlap >= self.chunk_size {
            return Err(ConfigError::Invalid {
                field: "chunk_overlap",
                message: format!("{} must be < chunk_size {}", self.chunk_overlap, self.chunk_size),
            });
        }
        if self.top_k == 0 {
            return Err(ConfigError::Invalid { field: "top_k", message: "must be >= 1".into() });
        }
        self.defense_defaults
            .validate()
            .map_err(|e| ConfigError::Invalid { field: "defense_defaults", message: e.to_string() })?;
        let require = |field: &'static str, kind_needs: bool, slot: &Option<EndpointConfig>| {
            if kind_needs && slot.is_none() {
                Err(ConfigError::Invalid {
                    field,
                    message: "REMOTE role needs an endpoint url".into(),
                })
            } else {
                Ok(())
            }
        };
        require("endpoints.sentinel", self.sentinel == ControllerKind::Remote, &self.endpoints.sentinel)?;
        require(
            "endpoints.strategist",
            self.strategist == ControllerKind::Remote,
            &self.endpoints.strategist,
        )?;
        require("endpoints.generator", self.generator == GeneratorKind::Remote, &self.endpoints.generator)?;
        require("endpoints.judge", self.judge == JudgeKind::Remote, &self.endpoints.judge)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid_and_match_core_settings() {
        let c = AppConfig::default();
        c.validate().unwrap();
        assert_eq!(c.embedding_dim, 384);
        assert_eq!(c.chunk_size, 512);
        assert_eq!(c.chunk_overlap, 50);
        assert_eq!(c.top_k, 5);
        assert_eq!(c.defense_defaults.dp_epsilon, 3.0);
    }

    #[test]
    fn remote_roles_require_endpoints() {
        let c = AppConfig { sentinel: ControllerKind::Remote, ..Default::default() };
        assert!(c.validate().is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        let original = AppConfig { top_k: 7, ..Default::default() };
        std::fs::write(&path, serde_json::to_string_pretty(&original).unwrap()).unwrap();
        let loaded = AppConfig::load(Some(&path)).unwrap();
        assert_eq!(loaded.top_k, 7);
    }

    #[test]
    fn partial_file_fills_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        std::fs::write(&path, "{\"top_k\": 3}").unwrap();
        let loaded = AppConfig::load(Some(&path)).unwrap();
        assert_eq!(loaded.top_k, 3);
        assert_eq!(loaded.chunk_size, 512);
    }
}
