//! Experiment harness: configuration, sweeps, lower-bound simulations and self-checks.

pub mod config;
pub mod experiment;
pub mod fit;
pub mod report;
pub mod verify;

/// Build version, from `git describe` when available.
pub const VERSION: &str = env!("HVPOPT_VERSION");
