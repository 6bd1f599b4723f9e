//! File formats, schedule loading and the command-line front end for the
//! cube denoiser in `star-core`.
//!
//! Everything user-facing lives here: the `.htc` cube container, the JSON
//! schedule schema, solve reports, and the `star` binary's subcommands.

pub mod cli;
pub mod htc;
pub mod report;
pub mod schedule;

use std::fmt;

/// Front-end failure modes, mapped onto process exit codes by
/// [`cli::cli_main`]: usage errors exit 1, everything else exits 2.
#[derive(Debug)]
pub enum CliError {
    /// Malformed, truncated or unreadable cube file.
    Format(String),
    /// Malformed schedule document.
    ScheduleParse(String),
    /// Error bubbled up from the solver/metrics core.
    Core(star_core::Error),
    /// Bad command-line usage detected after argument parsing.
    Usage(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Format(m) => write!(f, "FormatError: {m}"),
            CliError::ScheduleParse(m) => write!(f, "ScheduleParseError: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(m) => write!(f, "UsageError: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<star_core::Error> for CliError {
    fn from(e: star_core::Error) -> Self {
        CliError::Core(e)
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
