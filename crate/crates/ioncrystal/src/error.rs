//! Error type shared by every module in the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while building configurations or running
/// the numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value is unphysical or inconsistent (wrong sign,
    /// violated constraint, out-of-range argument).
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// An iterative routine failed to reach its convergence target.
    #[error("solver did not converge: {0}")]
    NoConvergence(String),

    /// A quantity left its mathematical domain (negative depth ratio,
    /// non-finite intermediate, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Survival data admit no unique temperature (all observed survival
    /// probabilities saturated at 0 or at 1).
    #[error("temperature fit is unidentifiable: {0}")]
    FitUnidentifiable(String),

    /// Malformed tabular input; line numbers are 1-based and include the
    /// header line.
    #[error("malformed input rows at lines {lines:?}: {reason}")]
    MalformedInput {
        /// 1-based line numbers of the offending rows.
        lines: Vec<usize>,
        /// Human-readable description of the first failure mode seen.
        reason: String,
    },
}

impl Error {
    /// Process exit code the command-line tool maps this error to:
    /// configuration/input problems exit 2, numerical failures exit 3.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidConfig(_) | Error::MalformedInput { .. } => 2,
            Error::NoConvergence(_) | Error::Domain(_) | Error::FitUnidentifiable(_) => 3,
        }
    }
}
