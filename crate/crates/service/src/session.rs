//! In-memory sequential-testing sessions.
//!
//! Each session sits behind its own mutex, so mutations of one session are
//! serialized while distinct sessions proceed in parallel. Every accepted
//! mutation is appended to the optional journal while the session lock is
//! held, which keeps the per-session event order in the file identical to
//! the in-memory order.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::{Arc, Mutex, RwLock};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use screening_core::{
    iterations_needed, posterior_update, IterationPlan, Prior, ScreeningError, TestProfile,
    TestResult,
};
use serde::{Deserialize, Serialize};

use crate::error::{ApiError, ErrorBody};

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// 128 random bits as 32 lowercase hex digits.
pub fn new_session_id() -> String {
    format!("{:032x}", rand::random::<u128>())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    pub id: String,
    pub test: TestProfile,
    pub initial_prior: Prior,
    pub target_rho: Option<f64>,
    pub results: Vec<TestResult>,
    /// `trajectory[0]` is the initial prior; `trajectory[k + 1]` follows
    /// `results[k]`.
    pub trajectory: Vec<f64>,
    pub created_at: u64,
    last_active: u64,
}

impl Session {
    pub fn new(
        id: String,
        test: TestProfile,
        initial_prior: Prior,
        target_rho: Option<f64>,
        created_at: u64,
    ) -> Self {
        Self {
            id,
            test,
            initial_prior,
            target_rho,
            results: Vec::new(),
            trajectory: vec![initial_prior.value()],
            created_at,
            last_active: created_at,
        }
    }

    pub fn current(&self) -> Prior {
        Prior::new(*self.trajectory.last().expect("trajectory is never empty"))
            .expect("trajectory holds probabilities")
    }

    pub fn push(&mut self, result: TestResult) -> Result<(), ScreeningError> {
        let next = posterior_update(self.current(), &self.test, result)?;
        self.results.push(result);
        self.trajectory.push(next.value());
        Ok(())
    }

    /// Drops the last result. Returns `false` when there is nothing to undo.
    pub fn undo(&mut self) -> bool {
        if self.results.pop().is_some() {
            self.trajectory.pop();
            true
        } else {
            false
        }
    }

    pub fn view(&self) -> SessionView {
        let remaining = self.target_rho.map(|target| {
            match iterations_needed(&self.test, self.current(), target) {
                Ok(plan) => Remaining::Plan(plan),
                Err(e) => Remaining::Error(ErrorBody {
                    error: e.name().to_owned(),
                    message: e.to_string(),
                }),
            }
        });
        SessionView {
            id: self.id.clone(),
            sensitivity: self.test.sensitivity(),
            specificity: self.test.specificity(),
            initial_prior: self.initial_prior.value(),
            target_rho: self.target_rho,
            results: self.results.clone(),
            trajectory: self.trajectory.clone(),
            current: *self.trajectory.last().expect("trajectory is never empty"),
            created_at: self.created_at,
            remaining,
        }
    }
}

/// Iterations still needed from the current posterior, or why that cannot
/// be computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Remaining {
    Plan(IterationPlan),
    Error(ErrorBody),
}

/// Wire form of a session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub id: String,
    pub sensitivity: f64,
    pub specificity: f64,
    pub initial_prior: f64,
    pub target_rho: Option<f64>,
    pub results: Vec<TestResult>,
    pub trajectory: Vec<f64>,
    pub current: f64,
    pub created_at: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub remaining: Option<Remaining>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
enum JournalEvent {
    Create {
        id: String,
        sensitivity: f64,
        specificity: f64,
        prior: f64,
        target_rho: Option<f64>,
        at: u64,
    },
    Result {
        id: String,
        result: TestResult,
        at: u64,
    },
    Undo {
        id: String,
        at: u64,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum JournalError {
    #[error("journal io: {0}")]
    Io(#[from] std::io::Error),
    #[error("journal line {line}: {message}")]
    Corrupt { line: usize, message: String },
}

type Shared = Arc<Mutex<Session>>;

pub struct SessionStore {
    sessions: RwLock<HashMap<String, Shared>>,
    ttl: Duration,
    journal: Option<Mutex<File>>,
}

impl SessionStore {
    pub fn in_memory(ttl: Duration) -> Self {
        Self {
            sessions: RwLock::new(HashMap::new()),
            ttl,
            journal: None,
        }
    }

    /// Opens (creating if needed) a journal, replaying it into memory.
    pub fn with_journal(ttl: Duration, path: &Path) -> Result<Self, JournalError> {
        let mut sessions = HashMap::new();
        if path.exists() {
            replay(BufReader::new(File::open(path)?), &mut sessions)?;
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        let store = Self {
            sessions: RwLock::new(
                sessions
                    .into_iter()
                    .map(|(id, s)| (id, Arc::new(Mutex::new(s))))
                    .collect(),
            ),
            ttl,
            journal: Some(Mutex::new(file)),
        };
        store.evict_expired();
        Ok(store)
    }

    pub fn len(&self) -> usize {
        self.sessions.read().expect("session map poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn expired(&self, session: &Session, now: u64) -> bool {
        now.saturating_sub(session.last_active) > self.ttl.as_secs()
    }

    pub fn evict_expired(&self) -> usize {
        let now = unix_now();
        let mut map = self.sessions.write().expect("session map poisoned");
        let before = map.len();
        map.retain(|_, s| !self.expired(&s.lock().expect("session poisoned"), now));
        before - map.len()
    }

    fn record(&self, event: &JournalEvent) -> Result<(), ApiError> {
        let Some(journal) = &self.journal else {
            return Ok(());
        };
        let mut line = serde_json::to_string(event).expect("journal event serializes");
        line.push('\n');
        let mut file = journal.lock().expect("journal poisoned");
        file.write_all(line.as_bytes())
            .and_then(|()| file.flush())
            .map_err(|e| {
                ApiError::new(
                    axum::http::StatusCode::INTERNAL_SERVER_ERROR,
                    "JournalWrite",
                    e.to_string(),
                )
            })
    }

    pub fn create(
        &self,
        test: TestProfile,
        prior: Prior,
        target_rho: Option<f64>,
    ) -> Result<SessionView, ApiError> {
        if let Some(t) = target_rho {
            if !(t > 0.0 && t <= 1.0) {
                return Err(ScreeningError::InvalidTarget(t).into());
            }
        }
        self.evict_expired();
        let now = unix_now();
        let session = Session::new(new_session_id(), test, prior, target_rho, now);
        self.record(&JournalEvent::Create {
            id: session.id.clone(),
            sensitivity: test.sensitivity(),
            specificity: test.specificity(),
            prior: prior.value(),
            target_rho,
            at: now,
        })?;
        let view = session.view();
        self.sessions
            .write()
            .expect("session map poisoned")
            .insert(session.id.clone(), Arc::new(Mutex::new(session)));
        Ok(view)
    }

    fn lookup(&self, id: &str) -> Result<Shared, ApiError> {
        self.sessions
            .read()
            .expect("session map poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(id))
    }

    /// Runs `f` with exclusive access to one live session.
    fn with_session<T>(
        &self,
        id: &str,
        f: impl FnOnce(&mut Session, u64) -> Result<T, ApiError>,
    ) -> Result<T, ApiError> {
        let shared = self.lookup(id)?;
        let mut session = shared.lock().expect("session poisoned");
        let now = unix_now();
        if self.expired(&session, now) {
            drop(session);
            self.sessions
                .write()
                .expect("session map poisoned")
                .remove(id);
            return Err(ApiError::not_found(id));
        }
        session.last_active = now;
        f(&mut session, now)
    }

    pub fn get(&self, id: &str) -> Result<SessionView, ApiError> {
        self.with_session(id, |s, _| Ok(s.view()))
    }

    pub fn push_result(&self, id: &str, result: TestResult) -> Result<SessionView, ApiError> {
        self.with_session(id, |s, now| {
            s.push(result)?;
            if let Err(e) = self.record(&JournalEvent::Result {
                id: id.to_owned(),
                result,
                at: now,
            }) {
                s.undo();
                return Err(e);
            }
            Ok(s.view())
        })
    }

    pub fn undo(&self, id: &str) -> Result<SessionView, ApiError> {
        self.with_session(id, |s, now| {
            let Some(&last) = s.results.last() else {
                return Err(ApiError::new(
                    axum::http::StatusCode::CONFLICT,
                    "NothingToUndo",
                    "session has no results",
                ));
            };
            s.undo();
            if let Err(e) = self.record(&JournalEvent::Undo {
                id: id.to_owned(),
                at: now,
            }) {
                s.push(last).expect("re-applying a previously valid result");
                return Err(e);
            }
            Ok(s.view())
        })
    }
}

fn replay(
    reader: impl BufRead,
    sessions: &mut HashMap<String, Session>,
) -> Result<(), JournalError> {
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let corrupt = |message: String| JournalError::Corrupt {
            line: idx + 1,
            message,
        };
        let event: JournalEvent =
            serde_json::from_str(&line).map_err(|e| corrupt(e.to_string()))?;
        match event {
            JournalEvent::Create {
                id,
                sensitivity,
                specificity,
                prior,
                target_rho,
                at,
            } => {
                let test = TestProfile::new(sensitivity, specificity)
                    .map_err(|e| corrupt(e.to_string()))?;
                let prior = Prior::new(prior).map_err(|e| corrupt(e.to_string()))?;
                sessions.insert(id.clone(), Session::new(id, test, prior, target_rho, at));
            }
            JournalEvent::Result { id, result, at } => {
                let s = sessions
                    .get_mut(&id)
                    .ok_or_else(|| corrupt(format!("unknown session {id}")))?;
                s.push(result).map_err(|e| corrupt(e.to_string()))?;
                s.last_active = at;
            }
            JournalEvent::Undo { id, at } => {
                let s = sessions
                    .get_mut(&id)
                    .ok_or_else(|| corrupt(format!("unknown session {id}")))?;
                s.undo();
                s.last_active = at;
            }
        }
    }
    Ok(())
}
