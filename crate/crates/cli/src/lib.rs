//! Command-line orchestration for `nsvac`: configuration files, single runs,
//! parameter sweeps, convergence studies and verification suites, all with
//! bit-stable artifacts.

pub mod config;
pub mod error;
pub mod format;
pub mod run;
pub mod sweep;
pub mod verify;

pub use config::{Axis, LoadedConfig, RunConfig};
pub use error::{CliError, Result};
