use thiserror::Error;

pub type Result<T> = std::result::Result<T, QtlError>;

#[derive(Debug, Error)]
pub enum QtlError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("degenerate model: {0}")]
    DegenerateModel(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl QtlError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        QtlError::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        QtlError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Process exit code: 1 usage/config, 2 data, 3 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            QtlError::InvalidArgument(_) | QtlError::Config(_) => 1,
            QtlError::Parse { .. } | QtlError::Validation(_) | QtlError::Io { .. } => 2,
            QtlError::DegenerateModel(_) | QtlError::Numerical(_) => 3,
        }
    }
}
