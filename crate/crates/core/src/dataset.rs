//! Dataset manifests and seeded batch generation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::task::{
    Difficulty, Registry, TaskDefinition, TaskError, TaskInstance, TaskOptions,
    MAX_GENERATION_RETRIES,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub tasks: Vec<String>,
    #[serde(default = "default_per_level")]
    pub per_level_count: u32,
    #[serde(default = "default_levels")]
    pub levels: Vec<Difficulty>,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub options: TaskOptions,
}

fn default_per_level() -> u32 {
    30
}

fn default_levels() -> Vec<Difficulty> {
    Difficulty::ALL.to_vec()
}

/// The eight bundled tasks.
pub const DEFAULT_TASKS: [&str; 8] = [
    "find_the_impostors",
    "word_guessing",
    "password_breaking",
    "zero_finding",
    "maze_navigation",
    "color_magic",
    "knight_battle",
    "grid_sum_game",
];

impl DatasetManifest {
    pub fn standard(base_seed: u64) -> Self {
        Self {
            tasks: DEFAULT_TASKS.iter().map(|s| s.to_string()).collect(),
            per_level_count: default_per_level(),
            levels: default_levels(),
            base_seed,
            options: TaskOptions::default(),
        }
    }

    pub fn expected_len(&self) -> usize {
        self.tasks.len() * self.levels.len() * self.per_level_count as usize
    }

    /// One entry per instance slot, in output order.
    pub fn slots(&self) -> Vec<Slot> {
        let mut out = Vec::with_capacity(self.expected_len());
        for task in &self.tasks {
            for &level in &self.levels {
                for index in 0..self.per_level_count {
                    out.push(Slot {
                        task: task.clone(),
                        level,
                        index,
                    });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slot {
    pub task: String,
    pub level: Difficulty,
    pub index: u32,
}

impl Slot {
    pub fn instance_id(&self) -> String {
        format!("{}-{}-{:03}", self.task, self.level, self.index)
    }
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error(transparent)]
    Task(#[from] TaskError),
    #[error("{instance_id}: no acceptable instance after {attempts} attempts ({last})")]
    GenerationFailure {
        instance_id: String,
        attempts: u32,
        last: String,
    },
}

/// Acceptance test applied to every candidate instance.
pub trait InstanceCheck: Sync {
    fn accept(&self, task: &dyn TaskDefinition, instance: &TaskInstance) -> Result<(), String>;
}

/// Accepts anything that passes the task's own well-formedness check.
pub struct WellFormed;

impl InstanceCheck for WellFormed {
    fn accept(&self, task: &dyn TaskDefinition, instance: &TaskInstance) -> Result<(), String> {
        task.check(instance)
    }
}

#[derive(Debug, Clone)]
pub struct GeneratedInstance {
    pub instance: TaskInstance,
    /// Candidates rejected before this one was accepted.
    pub retries: u32,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xCBF2_9CE4_8422_2325, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01B3)
    })
}

/// Mixes two 64-bit values; stable across platforms and releases.
pub fn mix(a: u64, b: u64) -> u64 {
    splitmix64(a ^ splitmix64(b))
}

/// Seed for one slot and attempt.
pub fn derive_seed(base: u64, task: &str, level: Difficulty, index: u32, attempt: u32) -> u64 {
    let mut h = mix(base, fnv1a(task.as_bytes()));
    h = mix(h, level as u64 + 1);
    h = mix(h, u64::from(index));
    mix(h, u64::from(attempt))
}

/// Generates every slot of `manifest`, retrying each slot with a fresh derived
/// seed until `check` accepts it.
pub fn generate_dataset(
    manifest: &DatasetManifest,
    registry: &Registry,
    check: &dyn InstanceCheck,
) -> Result<Vec<GeneratedInstance>, DatasetError> {
    for task in &manifest.tasks {
        registry.lookup(task)?;
    }
    manifest
        .slots()
        .into_par_iter()
        .map(|slot| generate_slot(manifest.base_seed, &slot, registry, check))
        .collect()
}

fn generate_slot(
    base_seed: u64,
    slot: &Slot,
    registry: &Registry,
    check: &dyn InstanceCheck,
) -> Result<GeneratedInstance, DatasetError> {
    let task = registry.lookup(&slot.task)?;
    let mut last = String::new();
    for attempt in 0..MAX_GENERATION_RETRIES {
        let seed = derive_seed(base_seed, &slot.task, slot.level, slot.index, attempt);
        let mut instance = match task.generate(slot.level, seed) {
            Ok(i) => i,
            Err(e) => {
                last = e.to_string();
                continue;
            }
        };
        instance.instance_id = slot.instance_id();
        match task.check(&instance).and_then(|_| check.accept(task.as_ref(), &instance)) {
            Ok(()) => {
                return Ok(GeneratedInstance {
                    instance,
                    retries: attempt,
                })
            }
            Err(reason) => last = reason,
        }
    }
    Err(DatasetError::GenerationFailure {
        instance_id: slot.instance_id(),
        attempts: MAX_GENERATION_RETRIES,
        last,
    })
}
