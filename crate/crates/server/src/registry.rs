//! In-process run registry.
//!
//! Each run has exactly one writer task that appends to the JSONL log and
//! publishes events. Readers get cloned snapshots; subscribers replay stored
//! events and then follow a `watch` channel carrying the latest seq.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use cpcboard_core::runlog::read_run_log;
use cpcboard_core::search::{run_id_for, ConfigError, PipelineCandidate, RunStatus};
use cpcboard_core::search_space::Violation;
use cpcboard_core::{
    run_search, validate_space, RunHeader, RunLogWriter, RunSnapshot, SearchConfig, SearchSpace,
};
use futures::Stream;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value as Json};
use tokio::sync::watch;

/// Emission rate of a run.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Pacing {
    #[default]
    Unpaced,
    PerSecond(f64),
}

impl Pacing {
    fn interval(self) -> Option<Duration> {
        match self {
            Pacing::Unpaced => None,
            Pacing::PerSecond(rate) => Some(Duration::from_secs_f64(1.0 / rate)),
        }
    }

    pub fn is_valid(self) -> bool {
        match self {
            Pacing::Unpaced => true,
            Pacing::PerSecond(rate) => rate.is_finite() && rate > 0.0,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PacingRepr {
    Rate(f64),
    Word(String),
}

impl Serialize for Pacing {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Pacing::Unpaced => s.serialize_str("unpaced"),
            Pacing::PerSecond(rate) => s.serialize_f64(*rate),
        }
    }
}

impl<'de> Deserialize<'de> for Pacing {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match PacingRepr::deserialize(d)? {
            PacingRepr::Word(w) if w == "unpaced" => Ok(Pacing::Unpaced),
            PacingRepr::Word(w) => Err(serde::de::Error::custom(format!(
                "pacing must be \"unpaced\" or a rate, got {w:?}"
            ))),
            PacingRepr::Rate(rate) => Ok(Pacing::PerSecond(rate)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    PipelineAdded,
    RunCompleted,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::PipelineAdded => "pipeline_added",
            EventKind::RunCompleted => "run_completed",
        }
    }
}

/// `pipeline_added` carries seq `n` for candidate `n`; `run_completed`
/// follows the last candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub run_id: String,
    pub seq: u64,
    pub kind: EventKind,
    pub payload: Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub run_id: String,
    pub status: RunStatus,
    pub seed: u64,
    pub candidates: usize,
    pub total: usize,
    pub log_path: PathBuf,
    /// Seconds since the Unix epoch.
    pub created: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum RegistryError {
    #[error("unknown run `{0}`")]
    UnknownRun(String),
    #[error("invalid search space")]
    Space(Vec<Violation>),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("invalid pacing")]
    Pacing,
    #[error("run log {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

struct RunState {
    snapshot: RunSnapshot,
    events: Vec<Event>,
    log_path: PathBuf,
    created: u64,
    order: u64,
    latest: watch::Sender<u64>,
}

impl RunState {
    fn summary(&self) -> RunSummary {
        RunSummary {
            run_id: self.snapshot.run_id.clone(),
            status: self.snapshot.status,
            seed: self.snapshot.config.seed,
            candidates: self.snapshot.candidates.len(),
            total: self.snapshot.config.total(),
            log_path: self.log_path.clone(),
            created: self.created,
        }
    }
}

struct Inner {
    data_dir: PathBuf,
    runs: BTreeMap<String, RunState>,
    next_order: u64,
}

#[derive(Clone)]
pub struct Registry {
    inner: Arc<Mutex<Inner>>,
}

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

fn completion_payload(snapshot: &RunSnapshot) -> Json {
    let best = cpcboard_core::leaderboard(snapshot).into_iter().next();
    json!({
        "status": RunStatus::Completed,
        "candidates": snapshot.candidates.len(),
        "best": best.map(|row| json!({"id": row.id, "roc_auc_holdout": row.roc_auc_holdout})),
    })
}

impl Registry {
    /// Empty registry writing logs under `data_dir`, which is created if
    /// missing.
    pub fn new(data_dir: impl Into<PathBuf>) -> Result<Self, RegistryError> {
        let data_dir = data_dir.into();
        std::fs::create_dir_all(&data_dir).map_err(|source| RegistryError::Io {
            path: data_dir.clone(),
            source,
        })?;
        Ok(Self {
            inner: Arc::new(Mutex::new(Inner {
                data_dir,
                runs: BTreeMap::new(),
                next_order: 0,
            })),
        })
    }

    fn lock(&self) -> MutexGuard<'_, Inner> {
        self.inner.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn data_dir(&self) -> PathBuf {
        self.lock().data_dir.clone()
    }

    /// Registers every `*.jsonl` log in the data directory. Finished logs
    /// are replayed as-is; unfinished ones are resumed unpaced after any
    /// torn final line is cut off. Returns the ids loaded and the files
    /// skipped with the reason.
    pub fn load_existing(&self) -> io::Result<(Vec<String>, Vec<(PathBuf, String)>)> {
        let dir = self.data_dir();
        let mut paths: Vec<PathBuf> = std::fs::read_dir(&dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
            .collect();
        paths.sort();
        let mut loaded = Vec::new();
        let mut skipped = Vec::new();
        for path in paths {
            match self.load_one(&path) {
                Ok(id) => loaded.push(id),
                Err(reason) => skipped.push((path, reason)),
            }
        }
        Ok((loaded, skipped))
    }

    fn load_one(&self, path: &Path) -> Result<String, String> {
        let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
        let complete = &text[..text.rfind('\n').map_or(0, |i| i + 1)];
        let snapshot = read_run_log(complete).map_err(|e| e.to_string())?;
        if self.lock().runs.contains_key(&snapshot.run_id) {
            return Err(format!("duplicate run id {}", snapshot.run_id));
        }
        let created = std::fs::metadata(path)
            .and_then(|m| m.modified())
            .ok()
            .and_then(|t| t.duration_since(UNIX_EPOCH).ok())
            .map_or(0, |d| d.as_secs());
        let run_id = snapshot.run_id.clone();
        if snapshot.status == RunStatus::Completed {
            self.insert(snapshot.clone(), path.to_path_buf(), created, true);
            return Ok(run_id);
        }

        let full =
            run_search(&snapshot.space, &snapshot.config, |_| {}).map_err(|e| e.to_string())?;
        let done = snapshot.candidates.len();
        if full.candidates[..done] != snapshot.candidates[..] {
            return Err("log does not match a replay of its own inputs".into());
        }
        if complete.len() != text.len() {
            let file = OpenOptions::new()
                .write(true)
                .open(path)
                .map_err(|e| e.to_string())?;
            file.set_len(complete.len() as u64)
                .map_err(|e| e.to_string())?;
        }
        let file = OpenOptions::new()
            .append(true)
            .open(path)
            .map_err(|e| e.to_string())?;
        let writer = RunLogWriter::resume(file, done as u64);
        let mut partial = snapshot;
        partial.status = RunStatus::Running;
        self.insert(partial, path.to_path_buf(), created, false);
        let pending = full.candidates[done..].to_vec();
        tokio::spawn(write_run(
            self.clone(),
            run_id.clone(),
            writer,
            pending,
            Pacing::Unpaced,
        ));
        Ok(run_id)
    }

    fn insert(&self, snapshot: RunSnapshot, log_path: PathBuf, created: u64, finished: bool) {
        let run_id = snapshot.run_id.clone();
        let mut events: Vec<Event> = snapshot
            .candidates
            .iter()
            .map(|c| pipeline_event(&run_id, c))
            .collect();
        if finished {
            events.push(Event {
                run_id: run_id.clone(),
                seq: snapshot.candidates.len() as u64 + 1,
                kind: EventKind::RunCompleted,
                payload: completion_payload(&snapshot),
            });
        }
        let latest = events.last().map_or(0, |e| e.seq);
        let mut inner = self.lock();
        let order = inner.next_order;
        inner.next_order += 1;
        inner.runs.insert(
            run_id,
            RunState {
                snapshot,
                events,
                log_path,
                created,
                order,
                latest: watch::Sender::new(latest),
            },
        );
    }

    /// Validates the inputs, creates the log and starts the writer task.
    /// Must be called inside a Tokio runtime.
    pub fn start_run(
        &self,
        space: SearchSpace,
        config: SearchConfig,
        pacing: Pacing,
    ) -> Result<String, RegistryError> {
        let violations = validate_space(&space);
        if !violations.is_empty() {
            return Err(RegistryError::Space(violations));
        }
        config.validate()?;
        if !pacing.is_valid() {
            return Err(RegistryError::Pacing);
        }

        let base = run_id_for(&space, &config);
        let (run_id, log_path, file) = {
            let inner = self.lock();
            let mut n = 1;
            loop {
                let id = if n == 1 {
                    base.clone()
                } else {
                    format!("{base}-{n}")
                };
                n += 1;
                if inner.runs.contains_key(&id) {
                    continue;
                }
                let path = inner.data_dir.join(format!("{id}.jsonl"));
                match OpenOptions::new().write(true).create_new(true).open(&path) {
                    Ok(file) => break (id, path, file),
                    Err(e) if e.kind() == io::ErrorKind::AlreadyExists => continue,
                    Err(source) => return Err(RegistryError::Io { path, source }),
                }
            }
        };
        let header = RunHeader::new(&run_id, &space, &config);
        let writer = RunLogWriter::new(file, &header).map_err(|source| RegistryError::Io {
            path: log_path.clone(),
            source,
        })?;
        let snapshot = RunSnapshot {
            run_id: run_id.clone(),
            space: space.clone(),
            config,
            candidates: Vec::new(),
            status: RunStatus::Running,
        };
        self.insert(snapshot, log_path, now(), false);

        let registry = self.clone();
        let id = run_id.clone();
        tokio::spawn(async move {
            let computed =
                tokio::task::spawn_blocking(move || run_search(&space, &config, |_| {})).await;
            let candidates = match computed {
                Ok(Ok(snapshot)) => snapshot.candidates,
                // inputs were validated above
                _ => Vec::new(),
            };
            write_run(registry, id, writer, candidates, pacing).await;
        });
        Ok(run_id)
    }

    fn publish(&self, run_id: &str, candidate: PipelineCandidate) {
        let mut inner = self.lock();
        let Some(run) = inner.runs.get_mut(run_id) else {
            return;
        };
        let event = pipeline_event(run_id, &candidate);
        let seq = event.seq;
        run.snapshot.candidates.push(candidate);
        run.events.push(event);
        run.latest.send_replace(seq);
    }

    fn complete(&self, run_id: &str) {
        let mut inner = self.lock();
        let Some(run) = inner.runs.get_mut(run_id) else {
            return;
        };
        run.snapshot.status = RunStatus::Completed;
        let seq = run.snapshot.candidates.len() as u64 + 1;
        run.events.push(Event {
            run_id: run_id.to_string(),
            seq,
            kind: EventKind::RunCompleted,
            payload: completion_payload(&run.snapshot),
        });
        run.latest.send_replace(seq);
    }

    pub fn list(&self) -> Vec<RunSummary> {
        let inner = self.lock();
        let mut runs: Vec<&RunState> = inner.runs.values().collect();
        runs.sort_by_key(|r| r.order);
        runs.into_iter().map(RunState::summary).collect()
    }

    pub fn summary(&self, run_id: &str) -> Result<RunSummary, RegistryError> {
        self.with_run(run_id, RunState::summary)
    }

    /// Consistent copy of the run, holding only candidates with
    /// `seq > since` when `since` is given.
    pub fn snapshot(&self, run_id: &str, since: Option<u64>) -> Result<RunSnapshot, RegistryError> {
        self.with_run(run_id, |run| {
            let s = &run.snapshot;
            RunSnapshot {
                run_id: s.run_id.clone(),
                space: s.space.clone(),
                config: s.config,
                candidates: s.since(since.unwrap_or(0)).to_vec(),
                status: s.status,
            }
        })
    }

    /// Stored events with `seq > from_seq`.
    pub fn events_after(&self, run_id: &str, from_seq: u64) -> Result<Vec<Event>, RegistryError> {
        self.with_run(run_id, |run| {
            let start = run.events.partition_point(|e| e.seq <= from_seq);
            run.events[start..].to_vec()
        })
    }

    fn with_run<T>(
        &self,
        run_id: &str,
        f: impl FnOnce(&RunState) -> T,
    ) -> Result<T, RegistryError> {
        let inner = self.lock();
        inner
            .runs
            .get(run_id)
            .map(f)
            .ok_or_else(|| RegistryError::UnknownRun(run_id.to_string()))
    }

    /// Every event with `seq > from_seq`, stored ones first and then live
    /// ones, ending after `run_completed`.
    pub fn subscribe(
        &self,
        run_id: &str,
        from_seq: u64,
    ) -> Result<impl Stream<Item = Event> + Send + 'static, RegistryError> {
        let rx = self.with_run(run_id, |run| run.latest.subscribe())?;
        let state = Subscription {
            registry: self.clone(),
            run_id: run_id.to_string(),
            last: from_seq,
            rx,
            buffered: Vec::new().into_iter(),
            done: false,
        };
        Ok(futures::stream::unfold(state, Subscription::next))
    }
}

struct Subscription {
    registry: Registry,
    run_id: String,
    last: u64,
    rx: watch::Receiver<u64>,
    buffered: std::vec::IntoIter<Event>,
    done: bool,
}

impl Subscription {
    async fn next(mut self) -> Option<(Event, Self)> {
        loop {
            if let Some(event) = self.buffered.next() {
                self.last = event.seq;
                if event.kind == EventKind::RunCompleted {
                    self.done = true;
                }
                return Some((event, self));
            }
            if self.done {
                return None;
            }
            // mark the current value seen before reading, so a publish that
            // lands after the read still wakes `changed`
            self.rx.borrow_and_update();
            let (batch, finished) = self
                .registry
                .with_run(&self.run_id, |run| {
                    let start = run.events.partition_point(|e| e.seq <= self.last);
                    (
                        run.events[start..].to_vec(),
                        run.snapshot.status == RunStatus::Completed,
                    )
                })
                .ok()?;
            if batch.is_empty() {
                if finished {
                    return None;
                }
                self.rx.changed().await.ok()?;
            } else {
                self.buffered = batch.into_iter();
            }
        }
    }
}

fn pipeline_event(run_id: &str, candidate: &PipelineCandidate) -> Event {
    Event {
        run_id: run_id.to_string(),
        seq: candidate.seq,
        kind: EventKind::PipelineAdded,
        payload: serde_json::to_value(candidate).expect("candidate serializes"),
    }
}

async fn write_run(
    registry: Registry,
    run_id: String,
    mut writer: RunLogWriter<File>,
    candidates: Vec<PipelineCandidate>,
    pacing: Pacing,
) {
    for (i, candidate) in candidates.into_iter().enumerate() {
        if let (Some(gap), true) = (pacing.interval(), i > 0) {
            tokio::time::sleep(gap).await;
        }
        if let Err(e) = writer.append(&candidate) {
            tracing::error!(run_id, error = %e, "log append failed, run stops here");
            return;
        }
        registry.publish(&run_id, candidate);
    }
    registry.complete(&run_id);
}
