//! Command-line front end for the alpha-z Renyi DPI toolkit: single-shot
//! divergence evaluation, (alpha, z) gap sweeps, saturation audits,
//! property-suite execution, and best-effort falsification outside the
//! monotone region.
//!
//! All campaign entry points are library functions so tests can drive them
//! in process; `main` only parses flags and maps errors to exit codes
//! (0 success, 1 property failure, 2 I/O or parse error, 3 invalid
//! parameters).

// Validation uses `!(x > y)` style comparisons so that NaN inputs fail.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use renyi_dpi_core::Error as CoreError;

pub mod audit;
pub mod config;
pub mod falsify;
pub mod fmt;
pub mod propsuite;
pub mod single;
pub mod sweep;

/// Environment variable supplying the default seed when neither flags nor
/// config files set one.
pub const SEED_ENV_VAR: &str = "RENYI_DPI_SEED";

/// Test-only fault injection: set to `psi-sign` to flip an exponent sign in
/// the property suite's trace-functional evaluation path.
pub const INJECT_BUG_ENV_VAR: &str = "RENYI_DPI_INJECT_BUG";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("property failure: {0}")]
    PropertyFailure(String),
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Malformed(msg) => CliError::Parse(msg),
            other => CliError::InvalidParams(other.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Parse(e.to_string())
    }
}

impl CliError {
    /// Process exit code per the external interface contract.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) | CliError::Parse(_) => 2,
            CliError::InvalidParams(_) => 3,
            CliError::PropertyFailure(_) => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Default seed: `RENYI_DPI_SEED` if set and parseable, otherwise 0.
pub fn default_seed() -> u64 {
    std::env::var(SEED_ENV_VAR)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(0)
}
