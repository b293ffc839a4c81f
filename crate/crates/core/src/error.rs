use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Failure modes shared by every module.
///
/// The variants are grouped the way the command-line driver maps them to
/// exit codes: input problems, numerical non-convergence, and violated
/// invariants of a computed object.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A numeric parameter is outside its admissible range.
    Parameter(String),
    /// A point lies outside the closed (or open, where required) unit ball.
    Domain(String),
    /// Kernel evaluated on (or numerically on) the diagonal.
    Singularity,
    /// Dimension or order outside the supported desk-scale range.
    Unsupported(String),
    /// A study was asked for in a regime where it does not apply.
    NotApplicable(String),
    /// A field or grid fails an input precondition.
    Precondition(String),
    /// Field, grid and kernel disagree on size or dimension.
    Mismatch(String),
    /// Iteration stopped before meeting its tolerances.
    Convergence { iterations: usize, residual: f64 },
    /// The grid does not resolve the requested feature.
    Resolution(String),
    /// A computed object failed its own invariant checks.
    Invariant(Vec<String>),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Parameter(m) => write!(f, "parameter error: {m}"),
            Error::Domain(m) => write!(f, "domain error: {m}"),
            Error::Singularity => write!(f, "kernel evaluated on the diagonal"),
            Error::Unsupported(m) => write!(f, "unsupported: {m}"),
            Error::NotApplicable(m) => write!(f, "not applicable: {m}"),
            Error::Precondition(m) => write!(f, "precondition failed: {m}"),
            Error::Mismatch(m) => write!(f, "mismatch: {m}"),
            Error::Convergence { iterations, residual } => {
                write!(f, "no convergence after {iterations} iterations (residual {residual:e})")
            }
            Error::Resolution(m) => write!(f, "resolution error: {m}"),
            Error::Invariant(v) => {
                write!(f, "invariant violated: ")?;
                for (i, s) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, "; ")?;
                    }
                    write!(f, "{s}")?;
                }
                Ok(())
            }
        }
    }
}

impl core::error::Error for Error {}
