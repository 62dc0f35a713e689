//! Configuration, run loop, checkpoints and diagnostics output for the
//! `pitaevskii` command.

pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod error;
pub mod ledger;
pub mod runner;

pub use checkpoint::{read_checkpoint, write_checkpoint, Checkpoint};
pub use config::{load_config, RunConfig, Stepper};
pub use error::{Result, SimError};
pub use ledger::{emit_diagnostics, read_diagnostics};
pub use runner::{run_simulation, ExitReport, RunOutcome, Simulation};
