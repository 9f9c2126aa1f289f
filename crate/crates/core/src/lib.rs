//! Multi-turn interactive reasoning games with rule-enforcing monitors.
//!
//! The crate is organised around three roles:
//!
//! - a generator ([`task`], [`dataset`], [`tasks`]) that turns a task id, a
//!   difficulty level and a seed into a [`task::TaskInstance`];
//! - a monitor ([`protocol`]) that extracts commands from free-form player
//!   text, dispatches them to the task, and decides when a session ends;
//! - an evaluator ([`metrics`]) computing accuracy, pairwise efficiency,
//!   invalid rate and reasoning-pattern frequencies over transcripts.
//!
//! [`oracles`] holds scripted players for every bundled task. They certify
//! that generated instances are solvable inside the turn budget.

pub mod dataset;
pub mod metrics;
pub mod oracles;
pub mod protocol;
pub mod task;
pub mod tasks;

pub use dataset::{generate_dataset, DatasetManifest, GeneratedInstance};
pub use protocol::{
    extract_command, CommandGrammar, CommandKind, ParsedCommand, Player, PlayerError, Session,
    SessionState, Status, Transcript, Turn, DEFAULT_MAX_TURNS,
};
pub use task::{
    Category, Difficulty, InstanceRecord, Registry, TaskDefinition, TaskError, TaskInstance,
    TaskOptions,
};
