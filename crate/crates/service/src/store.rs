//! Session records and their on-disk persistence: one JSON document per
//! session, replaced atomically through a temporary file and a rename.

use std::collections::HashMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use gmrs::SessionState;
use serde::{Deserialize, Serialize};
use tokio::sync::Mutex;

use crate::api::ProblemDescriptor;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionRecord {
    pub id: String,
    /// Milliseconds since the Unix epoch.
    pub created_ms: u64,
    pub updated_ms: u64,
    pub problem: ProblemDescriptor,
    pub state: SessionState,
}

impl SessionRecord {
    pub fn new(id: String, problem: ProblemDescriptor, state: SessionState) -> Self {
        let now = now_ms();
        Self {
            id,
            created_ms: now,
            updated_ms: now,
            problem,
            state,
        }
    }

    pub fn touch(&mut self) {
        self.updated_ms = now_ms();
    }
}

pub fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as u64)
}

/// A session behind its exclusive guard. `deleted` turns away requests that
/// looked the session up before it was removed.
#[derive(Debug)]
pub struct Slot {
    pub record: SessionRecord,
    pub deleted: bool,
}

pub type SessionHandle = Arc<Mutex<Slot>>;

/// All sessions of a server, optionally backed by a directory.
#[derive(Debug, Default)]
pub struct Store {
    dir: Option<PathBuf>,
    sessions: RwLock<HashMap<String, SessionHandle>>,
}

impl Store {
    /// Sessions live in memory only.
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Opens (creating if needed) a session directory and loads every
    /// session found there.
    pub fn open(dir: impl Into<PathBuf>) -> io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        let mut sessions = HashMap::new();
        for entry in fs::read_dir(&dir)? {
            let path = entry?.path();
            if path.extension().is_none_or(|e| e != "json") {
                continue;
            }
            let text = fs::read_to_string(&path)?;
            let record: SessionRecord = serde_json::from_str(&text)
                .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("{}: {e}", path.display())))?;
            if path.file_stem().and_then(|s| s.to_str()) != Some(record.id.as_str()) {
                log::warn!("skipping {}: file name does not match session id", path.display());
                continue;
            }
            sessions.insert(record.id.clone(), Arc::new(Mutex::new(Slot { record, deleted: false })));
        }
        log::info!("loaded {} sessions from {}", sessions.len(), dir.display());
        Ok(Self {
            dir: Some(dir),
            sessions: RwLock::new(sessions),
        })
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn len(&self) -> usize {
        self.sessions.read().expect("session map lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self
            .sessions
            .read()
            .expect("session map lock")
            .keys()
            .cloned()
            .collect();
        ids.sort();
        ids
    }

    fn path(&self, id: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{id}.json")))
    }

    /// Writes `record` durably before returning.
    pub fn persist(&self, record: &SessionRecord) -> io::Result<()> {
        let Some(path) = self.path(&record.id) else {
            return Ok(());
        };
        let tmp = path.with_extension("json.tmp");
        let text = serde_json::to_vec_pretty(record).map_err(io::Error::other)?;
        let mut file = fs::File::create(&tmp)?;
        file.write_all(&text)?;
        file.sync_all()?;
        fs::rename(&tmp, &path)
    }

    /// Persists and registers a new session.
    pub fn insert(&self, record: SessionRecord) -> io::Result<()> {
        self.persist(&record)?;
        let id = record.id.clone();
        let slot = Arc::new(Mutex::new(Slot { record, deleted: false }));
        self.sessions.write().expect("session map lock").insert(id, slot);
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<SessionHandle> {
        self.sessions.read().expect("session map lock").get(id).cloned()
    }

    /// Unregisters a session and deletes its file once in-flight requests on
    /// it are done. Returns false for unknown ids.
    pub async fn remove(&self, id: &str) -> io::Result<bool> {
        let Some(slot) = self.sessions.write().expect("session map lock").remove(id) else {
            return Ok(false);
        };
        let mut guard = slot.lock().await;
        guard.deleted = true;
        if let Some(path) = self.path(id) {
            match fs::remove_file(path) {
                Err(e) if e.kind() != io::ErrorKind::NotFound => return Err(e),
                _ => {}
            }
        }
        Ok(true)
    }
}
