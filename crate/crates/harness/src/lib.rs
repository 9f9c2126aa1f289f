//! Session driver for the bundled reasoning games.
//!
//! Connects players to the monitor loop, persists transcripts, and turns
//! result directories into metric reports. The `turnbench` binary is a thin
//! command-line layer over these modules.

pub mod endpoint;
pub mod human;
pub mod report;
pub mod runner;
pub mod serve;
pub mod store;

pub use endpoint::{ApiKey, EndpointConfig, RemotePlayer, API_KEY_ENV};
pub use runner::{run_dataset, PlayerKind, RunSpec, RunSummary};
