use std::path::{Path, PathBuf};

use lrorder_core::Error as CoreError;
use thiserror::Error;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_PARSE: i32 = 4;
pub const EXIT_ORDER: i32 = 5;
pub const EXIT_NONCONVERGENCE: i32 = 6;
pub const EXIT_SAMPLER: i32 = 7;
pub const EXIT_WRITE: i32 = 8;

pub const EXIT_CODES_HELP: &str = "\
Exit codes:
  0  success
  2  usage or configuration error
  3  missing or unreadable input (including `summarize` without fit output)
  4  malformed input data or mass-function file
  5  input pair is not likelihood-ratio ordered
  6  numerical routine did not converge
  7  sampler or summary failure
  8  output could not be written";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{}: {message}", path.display())]
    Input { path: PathBuf, message: String },

    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },

    #[error("cannot write {}: {message}", path.display())]
    Write { path: PathBuf, message: String },

    #[error(transparent)]
    Core(#[from] CoreError),
}

impl CliError {
    pub fn input(path: &Path, message: impl ToString) -> Self {
        CliError::Input { path: path.to_path_buf(), message: message.to_string() }
    }

    pub fn parse(path: &Path, message: impl ToString) -> Self {
        CliError::Parse { path: path.to_path_buf(), message: message.to_string() }
    }

    pub fn write(path: &Path, message: impl ToString) -> Self {
        CliError::Write { path: path.to_path_buf(), message: message.to_string() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Input { .. } => EXIT_INPUT,
            CliError::Parse { .. } => EXIT_PARSE,
            CliError::Write { .. } => EXIT_WRITE,
            CliError::Core(e) => match e {
                CoreError::Config(_) | CoreError::GridRange { .. } => EXIT_USAGE,
                CoreError::SupportMismatch(_)
                | CoreError::Positivity { .. }
                | CoreError::InvalidMassFunction(_)
                | CoreError::DegenerateData(_)
                | CoreError::InsufficientTruncation { .. } => EXIT_PARSE,
                CoreError::OrderViolation { .. } => EXIT_ORDER,
                CoreError::NonConvergence { .. } => EXIT_NONCONVERGENCE,
                CoreError::MixingSupport(_)
                | CoreError::Domain(_)
                | CoreError::State(_)
                | CoreError::Chain { .. }
                | CoreError::EmptyChain => EXIT_SAMPLER,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
