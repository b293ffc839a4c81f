//! File formats, reports and the command-line driver for `polyharm-core`.

pub mod binary;
pub mod cache;
pub mod cli;
pub mod commands;
pub mod config;
pub mod dump;
pub mod format;
pub mod suite;

use std::fmt;
use std::io;

use polyharm_core::Error;

/// Exit status for a core error: 2 for bad input, 3 for numerical
/// non-convergence or missing resolution, 4 for a violated invariant.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parameter(_)
        | Error::Domain(_)
        | Error::Singularity
        | Error::Unsupported(_)
        | Error::NotApplicable(_)
        | Error::Precondition(_)
        | Error::Mismatch(_) => 2,
        Error::Convergence { .. } | Error::Resolution(_) => 3,
        Error::Invariant(_) => 4,
    }
}

pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug)]
pub enum Failure {
    Core(Error),
    /// A flag value that does not parse or is missing for the chosen mode.
    Input(String),
    Io(io::Error),
    /// Suite criteria that failed.
    Criteria(Vec<String>),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Core(e) => exit_code(e),
            Failure::Input(_) => 2,
            Failure::Io(_) => EXIT_IO,
            Failure::Criteria(_) => 4,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Input(m) => write!(f, "invalid input: {m}"),
            Failure::Io(e) => write!(f, "io error: {e}"),
            Failure::Criteria(ids) => write!(f, "failed criteria: {}", ids.join(", ")),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}
