use std::fmt::Display;

use clickbait::corpus::CorpusError;
use clickbait::eval::EvalError;

/// Failure of a command, classified by exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Runtime(_) => 4,
        }
    }
}

pub fn config(e: impl Display) -> CliError {
    CliError::Config(e.to_string())
}

pub fn data(e: impl Display) -> CliError {
    CliError::Data(e.to_string())
}

pub fn runtime(e: impl Display) -> CliError {
    CliError::Runtime(e.to_string())
}

impl From<CorpusError> for CliError {
    fn from(e: CorpusError) -> Self {
        data(e)
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Corpus(e) => data(e),
            EvalError::SingleClass | EvalError::Empty => data(e),
            other => runtime(other),
        }
    }
}
