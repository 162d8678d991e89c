use std::collections::HashMap;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use beergame_core::session::{read_log, EventLog, SessionError, SessionId, SessionState};
use beergame_core::GameConfig;
use tokio::sync::{watch, Mutex};

use crate::error::ApiError;

/// One writer per session; readers take immutable snapshots from the watch
/// channel and never wait on the writer.
pub struct SessionHandle {
    writer: Mutex<Writer>,
    snapshot: watch::Sender<Arc<SessionState>>,
}

struct Writer {
    state: SessionState,
    log: Option<EventLog>,
}

impl SessionHandle {
    fn new(state: SessionState, log: Option<EventLog>) -> Self {
        let (snapshot, _) = watch::channel(Arc::new(state.clone()));
        SessionHandle {
            writer: Mutex::new(Writer { state, log }),
            snapshot,
        }
    }

    pub fn snapshot(&self) -> Arc<SessionState> {
        self.snapshot.borrow().clone()
    }

    pub fn subscribe(&self) -> watch::Receiver<Arc<SessionState>> {
        self.snapshot.subscribe()
    }

    /// Runs a command on a copy of the state. The copy is kept only if the
    /// command succeeds and its events reach the log.
    pub async fn apply<T>(
        &self,
        command: impl FnOnce(&mut SessionState) -> Result<T, SessionError>,
    ) -> Result<T, ApiError> {
        let mut w = self.writer.lock().await;
        let mut next = w.state.clone();
        let logged = next.events().len();
        let out = command(&mut next)?;
        if let Some(log) = w.log.as_mut() {
            log.append_all(&next.events()[logged..])
                .map_err(|e| ApiError::internal(format!("event log: {e}")))?;
        }
        if next.events().len() > logged {
            self.snapshot.send_replace(Arc::new(next.clone()));
        }
        w.state = next;
        Ok(out)
    }
}

pub struct Registry {
    sessions: RwLock<HashMap<SessionId, Arc<SessionHandle>>>,
    log_dir: Option<PathBuf>,
    default_config: GameConfig,
}

impl Registry {
    pub fn new(default_config: GameConfig, log_dir: Option<PathBuf>) -> Self {
        Registry {
            sessions: RwLock::new(HashMap::new()),
            log_dir,
            default_config,
        }
    }

    /// Rebuilds every session whose log sits in the log directory. Logs that
    /// do not replay are skipped and reported.
    pub fn restore(
        default_config: GameConfig,
        log_dir: PathBuf,
    ) -> io::Result<(Self, Vec<String>)> {
        std::fs::create_dir_all(&log_dir)?;
        let registry = Registry::new(default_config, Some(log_dir.clone()));
        let mut skipped = Vec::new();
        let mut paths: Vec<PathBuf> = std::fs::read_dir(&log_dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
            .collect();
        paths.sort();
        for path in paths {
            match restore_one(&path) {
                Ok(state) => {
                    let log = rewrite_log(&path, &state)?;
                    registry.insert(state, Some(log));
                }
                Err(e) => {
                    tracing::warn!(path = %path.display(), "skipping session log: {e}");
                    skipped.push(format!("{}: {e}", path.display()));
                }
            }
        }
        Ok((registry, skipped))
    }

    pub fn default_config(&self) -> &GameConfig {
        &self.default_config
    }

    pub fn len(&self) -> usize {
        self.sessions.read().expect("registry lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, id: &str) -> Result<Arc<SessionHandle>, ApiError> {
        self.sessions
            .read()
            .expect("registry lock")
            .get(&SessionId::from(id.to_owned()))
            .cloned()
            .ok_or_else(|| ApiError::not_found(id))
    }

    pub fn create(&self, config: GameConfig) -> Result<Arc<SessionHandle>, ApiError> {
        let state = SessionState::create(config)?;
        let log = match &self.log_dir {
            Some(dir) => {
                let mut log = EventLog::open(dir.join(format!("{}.jsonl", state.session_id())))
                    .map_err(|e| ApiError::internal(format!("event log: {e}")))?;
                log.append_all(state.events())
                    .map_err(|e| ApiError::internal(format!("event log: {e}")))?;
                Some(log)
            }
            None => None,
        };
        Ok(self.insert(state, log))
    }

    fn insert(&self, state: SessionState, log: Option<EventLog>) -> Arc<SessionHandle> {
        let id = state.session_id().clone();
        let handle = Arc::new(SessionHandle::new(state, log));
        self.sessions
            .write()
            .expect("registry lock")
            .insert(id, handle.clone());
        handle
    }
}

fn restore_one(path: &Path) -> Result<SessionState, String> {
    let events = read_log(path).map_err(|e| e.to_string())?;
    SessionState::replay(&events).map_err(|e| e.to_string())
}

/// Replaces a log with exactly the events that replayed, dropping any torn
/// tail so later appends start on a fresh line.
fn rewrite_log(path: &Path, state: &SessionState) -> io::Result<EventLog> {
    let tmp = path.with_extension("jsonl.tmp");
    let _ = std::fs::remove_file(&tmp);
    let mut log = EventLog::open(&tmp)?;
    log.append_all(state.events())?;
    drop(log);
    std::fs::rename(&tmp, path)?;
    EventLog::open(path)
}
