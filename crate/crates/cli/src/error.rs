use std::fmt;
use std::path::Path;

use velergo::Error;

/// Failure category; each maps to a process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Config,
    Data,
    Numeric,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: Kind,
    pub msg: String,
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        Self {
            kind: Kind::Config,
            msg: msg.into(),
        }
    }

    pub fn data(msg: impl Into<String>) -> Self {
        Self {
            kind: Kind::Data,
            msg: msg.into(),
        }
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Self {
            kind: Kind::Numeric,
            msg: msg.into(),
        }
    }

    pub fn code(&self) -> i32 {
        match self.kind {
            Kind::Config => 2,
            Kind::Data => 3,
            Kind::Numeric => 4,
        }
    }

    /// Classifies a library error raised while processing `context`.
    pub fn from_lib(context: &str, err: Error) -> Self {
        let msg = format!("{context}: {err}");
        match err {
            Error::InvalidParameter(_) => Self::config(msg),
            Error::Degenerate(_) => Self::numeric(msg),
            Error::Parse { .. }
            | Error::MissingValues(_)
            | Error::InvalidSeries(_)
            | Error::Mismatch(_)
            | Error::Io(_)
            | Error::Csv(_) => Self::data(msg),
        }
    }

    pub fn write_failed(path: &Path, err: impl fmt::Display) -> Self {
        Self::config(format!("cannot write {}: {err}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.msg)
    }
}

impl std::error::Error for CliError {}
