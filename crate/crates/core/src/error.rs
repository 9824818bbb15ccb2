//! Error type shared by every engine module.

use thiserror::Error;

/// Errors raised by curve construction, pricing, calibration and IO.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation (e.g. `T < t`).
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical procedure could not produce a finite answer.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A curve bootstrap failed for a specific instrument.
    #[error("calibration error at {instrument}: {reason}")]
    Calibration { instrument: String, reason: String },

    /// The caller combined inputs in a way the engine refuses.
    #[error("usage error: {0}")]
    Usage(String),

    /// Malformed input file, with file and line context.
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: u64,
        message: String,
    },

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn calibration(instrument: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Calibration {
            instrument: instrument.into(),
            reason: reason.into(),
        }
    }

    /// Process exit code for the command-line driver.
    ///
    /// 2 = usage (bad arguments, files or domain), 3 = calibration, 4 = numeric.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Parse { .. } | Error::Io(_) | Error::Domain(_) => 2,
            Error::Calibration { .. } => 3,
            Error::Numeric(_) => 4,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
