//! Configuration, batch runs and file export for the dirac-lfv solvers.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use commands::{run, Command, RunReport};
pub use config::RunConfig;
pub use error::CliError;

use dirac_lfv_core::eigensolver::DEFAULT_SEED;

pub const SEED_ENV: &str = "DIRAC_LFV_SEED";

/// Inverse-iteration seed: `DIRAC_LFV_SEED` when set, else the fixed default.
pub fn seed_from_env() -> Result<u64, CliError> {
    parse_seed(std::env::var(SEED_ENV).ok().as_deref())
}

pub fn parse_seed(raw: Option<&str>) -> Result<u64, CliError> {
    match raw {
        None => Ok(DEFAULT_SEED),
        Some(v) => v.trim().parse().map_err(|_| CliError::Config {
            field: SEED_ENV.into(),
            reason: format!("expected an unsigned integer, got `{v}`"),
        }),
    }
}
