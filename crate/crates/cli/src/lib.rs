//! Batch front end for `qmeas-core`: scenario files in, JSON and CSV
//! reports out.

pub mod config;
pub mod error;
pub mod format;
pub mod report;
pub mod run;

pub use config::{Overrides, ScenarioConfig, ScenarioKind};
pub use error::{exit, CliError};
pub use report::{Rendered, RunReport};
pub use run::{execute, run_config, run_scenario, sweep_config, sweep_random};
