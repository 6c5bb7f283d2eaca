//! Config-driven experiment runner behind the `bench` binary.
//!
//! A TOML file with `[problem]`, `[optimizer]` (or `[[optimizer]]`),
//! `[schedule]` and `[run]` sections selects the objective, the optimizers
//! and the harness settings. Every command writes its CSV outputs,
//! `summary.json`, the effective `config.toml` and a `manifest.json` holding
//! the config hash, master seed and library version.

mod build;
mod commands;
mod config;
mod output;
mod presets;

pub use commands::{execute, write_outcome, Command, Outcome, TRAJECTORY_HEADER};
pub use config::{
    ExperimentConfig, OptimizerList, OptimizerSection, ProblemName, ProblemParams, ProblemSection, RunSection,
    ScheduleSection,
};
pub use output::{fmt_f64, write_atomic, Csv};
pub use presets::{preset, PRESETS};
