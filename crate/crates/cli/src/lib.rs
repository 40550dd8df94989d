//! Config parsing, CSV output and command implementations behind the
//! `agewise` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod shipped;
pub mod table;

pub use commands::{run_analyze, run_optimize, run_reproduce, run_simulate, Fig3Variant, Figure};
pub use config::{parse_config, parse_config_str, ExperimentConfig, ObjectiveSpec};
pub use error::{CliError, ConfigError};
pub use table::{read_csv, write_csv, Cell, Table};

/// Environment variable capping the optimizer's worker threads.
pub const THREADS_ENV: &str = "AGEWISE_THREADS";

/// Sizes the global thread pool from [`THREADS_ENV`] when it is set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            CliError::usage(format!(
                "{THREADS_ENV} must be a positive integer, got `{value}`"
            ))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::usage(format!("cannot size thread pool: {e}")))
}
