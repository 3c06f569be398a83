//! The experiment driver: configuration, the slot loop tying environment,
//! agents and federation together, and the CSV/JSON artifacts.

pub mod config;
pub mod metrics;
pub mod runner;

pub use config::{PolicyKind, SimConfig};
pub use metrics::{avg_request_delay, hit_rate, RoundRow, SlotRow};
pub use runner::{compare_policies, run_experiment, RunOutput, RunSummary};
