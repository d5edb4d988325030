use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("position {x} m is outside the covered range [{lo}, {hi}] m")]
    OutOfRange { x: f64, lo: f64, hi: f64 },

    #[error("singular matrix in {0}")]
    Singular(&'static str),

    #[error("eigen decomposition failed: {0}")]
    Eigen(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("{path}: {message}")]
    Config { path: String, message: String },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
