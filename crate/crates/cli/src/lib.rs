//! Document format and command surface of the `opnerve` binary.

pub mod commands;
pub mod format;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("syntax: {0}")]
    Syntax(String),
    #[error("{loc}: {msg}")]
    Invalid { loc: String, msg: String },
    #[error("io: {0}")]
    Io(String),
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] opnerve::Error),
}

/// Exit codes: 0 success, 1 a check failed, 2 the run could not be carried out.
pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
