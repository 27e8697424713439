//! Command-line front end: config parsing, subcommands and exit statuses.

// negated comparisons double as NaN rejection
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;

pub use error::CliError;

/// Environment variable capping the worker threads.
pub const THREADS_VAR: &str = "FOWLER_LAB_THREADS";

/// Size the global rayon pool from `FOWLER_LAB_THREADS` when it is set.
pub fn init_threads(value: Option<&str>) -> Result<(), CliError> {
    let Some(v) = value else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::Validation(format!(
            "{THREADS_VAR} must be a positive integer, got `{v}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Validation(format!("{THREADS_VAR}: {e}")))
}
