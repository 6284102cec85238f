use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{}", located(file, *line, msg))]
    Data { file: String, line: Option<usize>, msg: String },

    #[error(transparent)]
    Compute(#[from] quadrelax::Error),

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

fn located(file: &str, line: Option<usize>, msg: &str) -> String {
    match line {
        Some(l) => format!("{file}:{l}: {msg}"),
        None => format!("{file}: {msg}"),
    }
}

impl CliError {
    pub fn data(file: &Path, line: Option<usize>, msg: impl Into<String>) -> Self {
        Self::Data { file: file.display().to_string(), line, msg: msg.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data { .. } => 3,
            CliError::Compute(_) | CliError::Io { .. } => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
