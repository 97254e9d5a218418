//! Command-line driver and simulation harness for silhouette-optimal
//! clustering.

pub mod campaign;
pub mod commands;
pub mod error;
pub mod io;
pub mod report;

pub use error::{CliError, CliResult};

/// Version stamped on every machine-readable output.
pub const SCHEMA_VERSION: u32 = 1;
