//! Runner for randomized fixed-angle time-evolution circuits built on
//! [`tepai_core`]: JSON configs, term files, a rayon worker pool and the
//! artifacts each subcommand writes.
//!
//! A run directory holds `header.json` (config echo and predictions),
//! `shots.jsonl` (one record per shot), `summary.json` (depends only on
//! config and seed) and `timing.json`.

pub mod commands;
pub mod config;
pub mod error;
pub mod runner;

pub use config::{load_term_file, Prepared, RunConfig};
pub use error::{AppError, AppResult};
