//! Per-user global trust score with bounded session history.
//!
//! The score lives in [0, 1] and moves by two clipped deltas per
//! interaction, one from each sentinel pass:
//! `score <- clip(score + delta_pre + delta_post, 0, 1)`. Scores are kept
//! on a 1e-12 grid after each update so repeated +-0.05/0.1 steps land on
//! exact values instead of accumulating float dust.
//!
//! The store serializes same-user updates (callers hold the user lock for
//! the whole interaction) while different users proceed concurrently, and
//! optionally writes through to a JSON file with atomic replace.

use std::collections::{BTreeMap, VecDeque};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, MutexGuard};

use serde::{Deserialize, Serialize};

use crate::error::ControlError;

/// Neutral prior for unseen users.
pub const INITIAL_TRUST: f64 = 0.5;

/// Interactions remembered per user.
pub const DEFAULT_HISTORY_WINDOW: usize = 10;

const SCORE_GRID: f64 = 1e12;

/// One completed interaction as remembered in the session window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionRecord {
    pub query_text: String,
    pub timestamp: f64,
    pub defenses_fired: Vec<String>,
    pub context_pruned: bool,
    pub output_masked: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrustRecord {
    pub user_id: String,
    pub score: f64,
    pub history: VecDeque<InteractionRecord>,
    pub window: usize,
}

impl TrustRecord {
    pub fn new(user_id: impl Into<String>) -> Self {
        Self {
            user_id: user_id.into(),
            score: INITIAL_TRUST,
            history: VecDeque::new(),
            window: DEFAULT_HISTORY_WINDOW,
        }
    }

    /// Whether any remembered interaction fired a defense.
    pub fn any_defense_fired(&self) -> bool {
        self.history.iter().any(|h| !h.defenses_fired.is_empty())
    }

    pub fn push_interaction(&mut self, interaction: InteractionRecord) {
        self.history.push_back(interaction);
        while self.history.len() > self.window {
            self.history.pop_front();
        }
    }

    /// Apply the two per-pass deltas and remember the interaction.
    pub fn update(
        &mut self,
        delta_pre: f64,
        delta_post: f64,
        interaction: InteractionRecord,
    ) -> Result<(), ControlError> {
        for delta in [delta_pre, delta_post] {
            if !(-0.1..=0.1).contains(&delta) || !delta.is_finite() {
                return Err(ControlError::DeltaOutOfRange(delta));
            }
        }
        let raw = (self.score + delta_pre + delta_post).clamp(0.0, 1.0);
        self.score = (raw * SCORE_GRID).round() / SCORE_GRID;
        self.push_interaction(interaction);
        Ok(())
    }
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct StoreFile {
    users: BTreeMap<String, TrustRecord>,
}

/// Trust persistence. In-memory map with optional JSON write-through.
pub struct TrustStore {
    inner: Mutex<BTreeMap<String, TrustRecord>>,
    locks: Mutex<BTreeMap<String, Arc<Mutex<()>>>>,
    path: Option<PathBuf>,
}

impl TrustStore {
    pub fn in_memory() -> Self {
        Self { inner: Mutex::new(BTreeMap::new()), locks: Mutex::new(BTreeMap::new()), path: None }
    }

    /// Open a file-backed store, loading existing records if the file
    /// exists.
    pub fn open(path: &Path) -> Result<Self, ControlError> {
        let users = if path.exists() {
            let data = std::fs::read_to_string(path)
                .map_err(|e| ControlError::TrustStore(e.to_string()))?;
            serde_json::from_str::<StoreFile>(&data)
                .map_err(|e| ControlError::TrustStore(e.to_string()))?
                .users
        } else {
            BTreeMap::new()
        };
        Ok(Self {
            inner: Mutex::new(users),
            locks: Mutex::new(BTreeMap::new()),
            path: Some(path.to_path_buf()),
        })
    }

    /// Per-user mutual exclusion handle. Hold the guard for the duration
    /// of one interaction; different users do not contend.
    pub fn user_lock(&self, user_id: &str) -> Arc<Mutex<()>> {
        let mut locks = self.locks.lock().unwrap();
        locks.entry(user_id.to_string()).or_insert_with(|| Arc::new(Mutex::new(()))).clone()
    }

    pub fn get_or_create(&self, user_id: &str) -> TrustRecord {
        let mut inner = self.inner.lock().unwrap();
        inner.entry(user_id.to_string()).or_insert_with(|| TrustRecord::new(user_id)).clone()
    }

    pub fn get(&self, user_id: &str) -> Option<TrustRecord> {
        self.inner.lock().unwrap().get(user_id).cloned()
    }

    /// Write a record back and persist. Write-through happens after every
    /// interaction, so a crash between passes loses at most one update.
    pub fn commit(&self, record: TrustRecord) -> Result<(), ControlError> {
        let snapshot = {
            let mut inner = self.inner.lock().unwrap();
            inner.insert(record.user_id.clone(), record);
            StoreFile { users: inner.clone() }
        };
        self.persist(&snapshot)
    }

    pub fn reset(&self, user_id: &str) -> Result<TrustRecord, ControlError> {
        let fresh = TrustRecord::new(user_id);
        self.commit(fresh.clone())?;
        Ok(fresh)
    }

    pub fn snapshot(&self) -> BTreeMap<String, TrustRecord> {
        self.inner.lock().unwrap().clone()
    }

    fn persist(&self, file: &StoreFile) -> Result<(), ControlError> {
        let Some(path) = &self.path else { return Ok(()) };
        let json = serde_json::to_string_pretty(file)
            .map_err(|e| ControlError::TrustStore(e.to_string()))?;
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, json).map_err(|e| ControlError::TrustStore(e.to_string()))?;
        std::fs::rename(&tmp, path).map_err(|e| ControlError::TrustStore(e.to_string()))?;
        Ok(())
    }
}

/// Convenience guard wrapper so orchestration code reads naturally.
pub fn lock_user<'a>(lock: &'a Arc<Mutex<()>>) -> MutexGuard<'a, ()> {
    lock.lock().unwrap()
}
