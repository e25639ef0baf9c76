use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors carry the name of the module that raised them so CLI messages can
/// be traced back to the failing stage.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{module}: invalid input: {message}")]
    Validation {
        module: &'static str,
        message: String,
    },
    #[error("{module}: domain error: {message}")]
    Domain {
        module: &'static str,
        message: String,
    },
    #[error("{module}: numerical failure: {message}")]
    Numerical {
        module: &'static str,
        message: String,
    },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn validation(module: &'static str, message: impl Into<String>) -> Self {
        Error::Validation {
            module,
            message: message.into(),
        }
    }

    pub fn domain(module: &'static str, message: impl Into<String>) -> Self {
        Error::Domain {
            module,
            message: message.into(),
        }
    }

    pub fn numerical(module: &'static str, message: impl Into<String>) -> Self {
        Error::Numerical {
            module,
            message: message.into(),
        }
    }

    /// Process exit code: 2 for bad input, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numerical { .. } => 3,
            _ => 2,
        }
    }
}
