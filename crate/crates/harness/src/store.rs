//! On-disk layout of datasets and runs.
//!
//! A dataset directory holds `manifest.json`, `instances.jsonl` and
//! `certification.jsonl`. A run directory holds `run.json` and one
//! `transcripts/<instance_id>.json` per finished session. Every file is
//! written to a `.tmp` sibling first and renamed into place.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;
use turnbench_core::dataset::{generate_dataset, DatasetError, InstanceCheck, WellFormed};
use turnbench_core::oracles::{Certification, Certifier};
use turnbench_core::{DatasetManifest, InstanceRecord, Registry, TaskDefinition, TaskError, TaskInstance, Transcript};

pub const MANIFEST: &str = "manifest.json";
pub const INSTANCES: &str = "instances.jsonl";
pub const CERTIFICATION: &str = "certification.jsonl";
pub const RUN_HEADER: &str = "run.json";
pub const TRANSCRIPTS: &str = "transcripts";
const TMP_SUFFIX: &str = ".tmp";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("dataset not found at {0}")]
    DatasetNotFound(String),
    #[error("no transcripts under {0}")]
    NoTranscripts(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}:{line}: {source}")]
    Json { path: String, line: usize, source: serde_json::Error },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Task(#[from] TaskError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io { path: path.display().to_string(), source }
}

/// Writes `bytes` to `path` via a temporary sibling and a rename, so readers
/// only ever see whole files.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(TMP_SUFFIX);
    let tmp = PathBuf::from(tmp);
    let mut file = fs::File::create(&tmp).map_err(io_err(&tmp))?;
    file.write_all(bytes).map_err(io_err(&tmp))?;
    file.sync_all().map_err(io_err(&tmp))?;
    drop(file);
    fs::rename(&tmp, path).map_err(io_err(path))
}

fn jsonl<T: Serialize>(items: impl IntoIterator<Item = T>) -> String {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(&item).expect("records serialize"));
        out.push('\n');
    }
    out
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, StoreError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|source| StoreError::Json { path: path.display().to_string(), line: i + 1, source })
        })
        .collect()
}

/// Certifier wrapper that keeps the record of every accepted instance.
struct Recording<'a> {
    certifier: &'a Certifier,
    accepted: Mutex<BTreeMap<String, Certification>>,
}

impl InstanceCheck for Recording<'_> {
    fn accept(&self, task: &dyn TaskDefinition, instance: &TaskInstance) -> Result<(), String> {
        let c = self.certifier.certify(task, instance).map_err(|e| e.to_string())?;
        if !c.accepted {
            return Err(match c.win_rate {
                Some(rate) => format!("oracle win rate {rate:.3} below {}", self.certifier.threshold),
                None => format!("oracle did not solve within {} turns", self.certifier.max_turns),
            });
        }
        self.accepted.lock().expect("certification log").insert(c.instance_id.clone(), c);
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DatasetSummary {
    pub instances: usize,
    pub retries: u32,
    pub certified: bool,
    #[serde(skip)]
    pub elapsed: Duration,
}

/// Generates `manifest` into `dir`. With a certifier, every instance must
/// pass it and `certification.jsonl` lists the outcomes.
pub fn generate_to(dir: &Path, manifest: &DatasetManifest, certifier: Option<&Certifier>) -> Result<DatasetSummary, StoreError> {
    let start = Instant::now();
    let registry = Registry::standard(&manifest.options)?;
    let (generated, certifications) = match certifier {
        Some(certifier) => {
            let recording = Recording { certifier, accepted: Mutex::new(BTreeMap::new()) };
            let generated = generate_dataset(manifest, &registry, &recording)?;
            let log = recording.accepted.into_inner().expect("certification log");
            let certs: Vec<Certification> = generated
                .iter()
                .filter_map(|g| log.get(&g.instance.instance_id).cloned())
                .collect();
            (generated, certs)
        }
        None => (generate_dataset(manifest, &registry, &WellFormed)?, Vec::new()),
    };
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let manifest_json = serde_json::to_string_pretty(manifest).expect("manifest serializes") + "\n";
    atomic_write(&dir.join(MANIFEST), manifest_json.as_bytes())?;
    atomic_write(&dir.join(INSTANCES), jsonl(generated.iter().map(|g| g.instance.record())).as_bytes())?;
    atomic_write(&dir.join(CERTIFICATION), jsonl(&certifications).as_bytes())?;
    Ok(DatasetSummary {
        instances: generated.len(),
        retries: generated.iter().map(|g| g.retries).sum(),
        certified: certifier.is_some(),
        elapsed: start.elapsed(),
    })
}

/// Path of `instances.jsonl` for a dataset directory or file argument.
pub fn instances_path(dataset: &Path) -> PathBuf {
    if dataset.is_dir() {
        dataset.join(INSTANCES)
    } else {
        dataset.to_path_buf()
    }
}

pub fn read_instances(dataset: &Path) -> Result<Vec<InstanceRecord>, StoreError> {
    let path = instances_path(dataset);
    if !path.is_file() {
        return Err(StoreError::DatasetNotFound(dataset.display().to_string()));
    }
    read_jsonl(&path)
}

/// Manifest next to the instances, if any.
pub fn read_manifest(dataset: &Path) -> Result<Option<DatasetManifest>, StoreError> {
    let dir = if dataset.is_dir() { dataset.to_path_buf() } else { dataset.parent().map(Path::to_path_buf).unwrap_or_default() };
    let path = dir.join(MANIFEST);
    if !path.is_file() {
        return Ok(None);
    }
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    serde_json::from_str(&text)
        .map(Some)
        .map_err(|source| StoreError::Json { path: path.display().to_string(), line: 0, source })
}

pub fn read_certifications(dataset: &Path) -> Result<Vec<Certification>, StoreError> {
    read_jsonl(&dataset.join(CERTIFICATION))
}

pub fn transcript_dir(run_dir: &Path) -> PathBuf {
    run_dir.join(TRANSCRIPTS)
}

pub fn transcript_path(run_dir: &Path, instance_id: &str) -> PathBuf {
    transcript_dir(run_dir).join(format!("{instance_id}.json"))
}

pub fn write_transcript(run_dir: &Path, transcript: &Transcript) -> Result<(), StoreError> {
    let body = serde_json::to_string_pretty(transcript).expect("transcript serializes") + "\n";
    atomic_write(&transcript_path(run_dir, &transcript.instance_id), body.as_bytes())
}

/// Finished transcript files in a run directory, sorted, ignoring
/// temporaries left by an interrupted write.
pub fn transcript_files(run_dir: &Path) -> Result<Vec<PathBuf>, StoreError> {
    let dir = transcript_dir(run_dir);
    if !dir.is_dir() {
        return Ok(Vec::new());
    }
    let mut files = Vec::new();
    for entry in fs::read_dir(&dir).map_err(io_err(&dir))? {
        let path = entry.map_err(io_err(&dir))?.path();
        if path.extension().is_some_and(|e| e == "json") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

pub fn read_transcript(path: &Path) -> Result<Transcript, StoreError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|source| StoreError::Json { path: path.display().to_string(), line: 0, source })
}

pub fn read_transcripts(run_dir: &Path) -> Result<Vec<Transcript>, StoreError> {
    let files = transcript_files(run_dir)?;
    if files.is_empty() {
        return Err(StoreError::NoTranscripts(run_dir.display().to_string()));
    }
    files.iter().map(|p| read_transcript(p)).collect()
}

/// Removes temporaries left behind by a killed run.
pub fn clean_temporaries(run_dir: &Path) -> Result<usize, StoreError> {
    let dir = transcript_dir(run_dir);
    if !dir.is_dir() {
        return Ok(0);
    }
    let mut removed = 0;
    for entry in fs::read_dir(&dir).map_err(io_err(&dir))? {
        let path = entry.map_err(io_err(&dir))?.path();
        if path.to_string_lossy().ends_with(TMP_SUFFIX) {
            fs::remove_file(&path).map_err(io_err(&path))?;
            removed += 1;
        }
    }
    Ok(removed)
}

/// Header written once per run directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunHeader {
    pub model_id: String,
    pub player: BTreeMap<String, serde_json::Value>,
    pub dataset: String,
    pub max_turns: u32,
}

pub fn write_run_header(run_dir: &Path, header: &RunHeader) -> Result<(), StoreError> {
    let body = serde_json::to_string_pretty(header).expect("header serializes") + "\n";
    atomic_write(&run_dir.join(RUN_HEADER), body.as_bytes())
}

pub fn read_run_header(run_dir: &Path) -> Result<Option<RunHeader>, StoreError> {
    let path = run_dir.join(RUN_HEADER);
    if !path.is_file() {
        return Ok(None);
    }
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    serde_json::from_str(&text)
        .map(Some)
        .map_err(|source| StoreError::Json { path: path.display().to_string(), line: 0, source })
}

/// SHA-256 over the names and contents of `files`, in the given order.
pub fn digest_files(files: &[PathBuf]) -> Result<String, StoreError> {
    let mut hasher = Sha256::new();
    for f in files {
        let name = f.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        hasher.update(name.as_bytes());
        hasher.update([0]);
        hasher.update(fs::read(f).map_err(io_err(f))?);
        hasher.update([0]);
    }
    Ok(hex::encode(hasher.finalize()))
}

/// Digest of a dataset directory's three files.
pub fn dataset_digest(dir: &Path) -> Result<String, StoreError> {
    digest_files(&[dir.join(MANIFEST), dir.join(INSTANCES), dir.join(CERTIFICATION)])
}

/// Digest of a run's transcripts with the player header fields removed,
/// so runs of the same player with different settings compare by content.
pub fn transcripts_digest(run_dir: &Path) -> Result<String, StoreError> {
    let mut hasher = Sha256::new();
    for t in read_transcripts(run_dir)? {
        let mut t = t;
        t.player.clear();
        hasher.update(t.to_json_line().as_bytes());
        hasher.update(b"\n");
    }
    Ok(hex::encode(hasher.finalize()))
}
