//! Command-line driver for clipflow: config parsing, simulation runs,
//! verification suites and convergence studies.
//!
//! Exit codes: 0 success, 1 a check failed, 2 usage, config or I/O error,
//! 3 extinction before the last step, 4 unsupported model/check combination.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod model;

pub use commands::{cmd_converge, cmd_simulate, cmd_verify, Suite};
pub use config::{parse_config, parse_config_str, ConfigError, SimConfig};
pub use error::{CliError, CliResult};

/// Sizes the global thread pool from a `CLIPFLOW_THREADS` value; unset or 0
/// leaves the default of one thread per core.
pub fn init_threads(value: Option<&str>) -> CliResult<()> {
    let n = match value.map(str::trim) {
        None | Some("") => 0,
        Some(v) => v
            .parse::<usize>()
            .map_err(|_| CliError::Usage(format!("CLIPFLOW_THREADS must be a non-negative integer, got `{v}`")))?,
    };
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot size the thread pool: {e}")))?;
    }
    Ok(())
}
