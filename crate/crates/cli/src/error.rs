use qsl_core::QslError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical error: {0}")]
    Numerical(#[from] QslError),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("audit failed: {0}")]
    AuditFailed(String),
}

impl CliError {
    pub fn field(name: &str, problem: &str) -> Self {
        CliError::Config(format!("field `{name}` {problem}"))
    }

    pub fn io(path: impl std::fmt::Display, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_string(),
            source,
        }
    }

    /// Process exit code: 2 config or I/O, 3 numerical, 4 audit violation.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Numerical(_) => 3,
            CliError::AuditFailed(_) => 4,
        }
    }
}
