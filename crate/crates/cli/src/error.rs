//! CLI errors carrying their exit code: 1 usage, 2 data, 3 backend.

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// Wrong invocation: bad flag values, contradictory options.
    Usage(String),
    /// Bad or missing input data: unreadable files, invalid content.
    Data(String),
    /// The generation backend could not be used at all.
    Backend(String),
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> CliError {
        CliError::Usage(message.into())
    }

    pub fn data(message: impl Into<String>) -> CliError {
        CliError::Data(message.into())
    }

    pub fn backend(message: impl Into<String>) -> CliError {
        CliError::Backend(message.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Backend(_) => 3,
        }
    }

    /// Prefix the message with the pipeline stage that failed.
    pub fn in_stage(self, stage: &str) -> CliError {
        let rewrap = |message| format!("stage `{stage}` failed: {message}");
        match self {
            CliError::Usage(m) => CliError::Usage(rewrap(m)),
            CliError::Data(m) => CliError::Data(rewrap(m)),
            CliError::Backend(m) => CliError::Backend(rewrap(m)),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Backend(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}
