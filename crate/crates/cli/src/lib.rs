//! File formats, commands and the grid-world experiment harness behind the
//! `cfcheck` binary.

pub mod commands;
pub mod experiment;
pub mod model_file;
pub mod trace_file;

use cfcheck_core::logic::ParseError;
use cfcheck_core::mdp::MdpError;
use cfcheck_core::scm::ScmError;
use cfcheck_core::statcheck::CheckError;
use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const FALSE: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const UNDECIDED: i32 = 3;
    pub const PARSE: i32 = 4;
    pub const INCONSISTENT: i32 = 5;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: String, message: String },
    #[error("formula parse error: {0}")]
    Parse(#[from] ParseError),
    #[error("{0}")]
    Inconsistent(ScmError),
    #[error("{0}")]
    Model(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Parse(_) => exit::PARSE,
            CliError::Inconsistent(_) => exit::INCONSISTENT,
            _ => exit::USAGE,
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }
}

impl From<MdpError> for CliError {
    fn from(e: MdpError) -> Self {
        CliError::Model(e.to_string())
    }
}

impl From<ScmError> for CliError {
    fn from(e: ScmError) -> Self {
        match e {
            ScmError::Inconsistent { .. } => CliError::Inconsistent(e),
            ScmError::UnknownPolicy { .. } => CliError::Usage(e.to_string()),
            other => CliError::Model(other.to_string()),
        }
    }
}

impl From<CheckError> for CliError {
    fn from(e: CheckError) -> Self {
        match e {
            CheckError::Scm(s) => s.into(),
            other => CliError::Usage(other.to_string()),
        }
    }
}
