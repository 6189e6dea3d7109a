//! Experiment runner for `qergo-core`.
//!
//! A run reads a TOML config ([`config`]), executes its sweep on the rayon pool
//! ([`experiments`]), and writes CSV tables plus a `manifest.json` ([`run()`]).
//! [`report`] aggregates finished runs over seeds.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiments;
pub mod manifest;
pub mod report;
pub mod run;
pub mod table;

pub use config::{ExperimentConfig, ExperimentKind};
pub use error::{LabError, Result};
pub use run::{output_root, run, RunOutcome};
