//! Runs a player over every instance of a dataset.

use std::collections::HashSet;
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use serde::Serialize;
use thiserror::Error;
use turnbench_core::oracles::oracle_player;
use turnbench_core::protocol::{play, Player, PlayerError};
use turnbench_core::{Registry, Session, Status, TaskInstance, TaskOptions, Transcript, DEFAULT_MAX_TURNS};

use crate::endpoint::{EndpointConfig, RemotePlayer};
use crate::human::HumanPlayer;
use crate::store::{self, RunHeader, StoreError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlayerKind {
    Remote,
    Oracle,
    Human,
}

impl FromStr for PlayerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "remote" => Ok(PlayerKind::Remote),
            "oracle" => Ok(PlayerKind::Oracle),
            "human" => Ok(PlayerKind::Human),
            other => Err(format!("unknown player kind `{other}` (remote, oracle, human)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunSpec {
    pub dataset: PathBuf,
    pub player: PlayerKind,
    pub endpoint: Option<EndpointConfig>,
    pub parallel: usize,
    pub out: PathBuf,
    pub resume: bool,
    pub max_turns: u32,
}

impl RunSpec {
    pub fn new(dataset: impl Into<PathBuf>, player: PlayerKind, out: impl Into<PathBuf>) -> Self {
        Self {
            dataset: dataset.into(),
            player,
            endpoint: None,
            parallel: 1,
            out: out.into(),
            resume: false,
            max_turns: DEFAULT_MAX_TURNS,
        }
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("the remote player needs an endpoint config")]
    MissingEndpoint,
    #[error("{0} already holds transcripts; pass --resume to continue that run")]
    OutputNotEmpty(String),
    #[error("worker thread panicked")]
    WorkerPanic,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct RunSummary {
    pub total: usize,
    /// Instances skipped because a transcript already existed.
    pub skipped: usize,
    pub completed: usize,
    pub solved: usize,
    /// `(instance_id, failure tag)` of sessions that ended on a player failure.
    pub failures: Vec<(String, String)>,
}

/// Builds a fresh player for one instance.
pub type PlayerFactory<'a> = dyn Fn(&TaskInstance) -> Result<Box<dyn Player>, PlayerError> + Sync + 'a;

/// Called after every finished session.
pub type Progress<'a> = dyn Fn(&Transcript, &RunSummary) + Sync + 'a;

/// Plays one session, turning a player construction failure into a failed
/// transcript rather than an error.
pub fn run_session(registry: &Registry, instance: &TaskInstance, factory: &PlayerFactory, max_turns: u32) -> Transcript {
    let task = registry.lookup(&instance.task_id).expect("instance task is registered");
    match factory(instance) {
        Ok(mut player) => play(task.as_ref(), instance, player.as_mut(), max_turns),
        Err(e) => {
            let mut session = Session::with_max_turns(task.as_ref(), instance, max_turns);
            session.abort(e.tag(), e.to_string());
            session.into_transcript()
        }
    }
}

/// Runs `instances` with up to `parallel` concurrent sessions, writing each
/// transcript into `out` as soon as it finishes.
pub fn run_instances(
    registry: &Registry,
    instances: &[TaskInstance],
    out: &Path,
    parallel: usize,
    max_turns: u32,
    factory: &PlayerFactory,
    progress: Option<&Progress>,
) -> Result<RunSummary, RunError> {
    let next = AtomicUsize::new(0);
    let summary = Mutex::new(RunSummary { total: instances.len(), ..RunSummary::default() });
    let first_error: Mutex<Option<StoreError>> = Mutex::new(None);
    let workers = parallel.clamp(1, instances.len().max(1));
    let ok = thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                scope.spawn(|| loop {
                    if first_error.lock().expect("error slot").is_some() {
                        return;
                    }
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    let Some(instance) = instances.get(i) else {
                        return;
                    };
                    let transcript = run_session(registry, instance, factory, max_turns);
                    if let Err(e) = store::write_transcript(out, &transcript) {
                        first_error.lock().expect("error slot").get_or_insert(e);
                        return;
                    }
                    let mut s = summary.lock().expect("summary");
                    s.completed += 1;
                    s.solved += usize::from(transcript.final_status == Status::Solved);
                    if let Some(f) = &transcript.failure {
                        s.failures.push((transcript.instance_id.clone(), f.tag.clone()));
                    }
                    if let Some(p) = progress {
                        p(&transcript, &s);
                    }
                })
            })
            .collect();
        handles.into_iter().all(|h| h.join().is_ok())
    });
    if !ok {
        return Err(RunError::WorkerPanic);
    }
    if let Some(e) = first_error.into_inner().expect("error slot") {
        return Err(e.into());
    }
    let mut summary = summary.into_inner().expect("summary");
    summary.failures.sort();
    Ok(summary)
}

/// Loads and regenerates the dataset, then runs the requested player.
pub fn run_dataset(spec: &RunSpec, progress: Option<&Progress>) -> Result<RunSummary, RunError> {
    let records = store::read_instances(&spec.dataset)?;
    let options = store::read_manifest(&spec.dataset)?.map(|m| m.options).unwrap_or_else(TaskOptions::default);
    let registry = Registry::standard(&options).map_err(StoreError::from)?;
    let instances = records
        .iter()
        .map(|r| registry.regenerate(r))
        .collect::<Result<Vec<_>, _>>()
        .map_err(StoreError::from)?;

    let existing = store::transcript_files(&spec.out)?;
    if !spec.resume && !existing.is_empty() {
        return Err(RunError::OutputNotEmpty(spec.out.display().to_string()));
    }
    store::clean_temporaries(&spec.out)?;
    let done: HashSet<String> = existing
        .iter()
        .filter(|p| store::read_transcript(p).is_ok())
        .filter_map(|p| p.file_stem().map(|s| s.to_string_lossy().into_owned()))
        .collect();
    let pending: Vec<TaskInstance> = instances.into_iter().filter(|i| !done.contains(&i.instance_id)).collect();
    let skipped = records.len() - pending.len();

    let (model_id, player_header, parallel) = match spec.player {
        PlayerKind::Remote => {
            let config = spec.endpoint.as_ref().ok_or(RunError::MissingEndpoint)?;
            let header = RemotePlayer::new(config.clone(), None).describe();
            (config.model.clone(), header, spec.parallel)
        }
        PlayerKind::Oracle => ("oracle".to_string(), [("kind".to_string(), "oracle".into())].into(), spec.parallel),
        PlayerKind::Human => ("human".to_string(), [("kind".to_string(), "human".into())].into(), 1),
    };
    store::write_run_header(
        &spec.out,
        &RunHeader {
            model_id,
            player: player_header,
            dataset: spec.dataset.display().to_string(),
            max_turns: spec.max_turns,
        },
    )?;

    let endpoint = spec.endpoint.clone();
    let factory = move |instance: &TaskInstance| -> Result<Box<dyn Player>, PlayerError> {
        match spec.player {
            PlayerKind::Remote => {
                let config = endpoint.clone().expect("checked above");
                Ok(Box::new(RemotePlayer::from_env(config)))
            }
            PlayerKind::Oracle => oracle_player(instance)
                .map(|p| Box::new(p) as Box<dyn Player>)
                .map_err(|e| PlayerError::Failed(e.to_string())),
            PlayerKind::Human => Ok(Box::new(HumanPlayer::new(io::stdin().lock(), io::stdout()))),
        }
    };
    let mut summary = run_instances(&registry, &pending, &spec.out, parallel, spec.max_turns, &factory, progress)?;
    summary.total = records.len();
    summary.skipped = skipped;
    Ok(summary)
}
