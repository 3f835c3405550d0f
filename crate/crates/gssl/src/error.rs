use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by the harness and the command line.
#[derive(Debug, Error)]
pub enum GsslError {
    #[error("configuration: {0}")]
    Config(String),

    #[error("{path}: {message}")]
    Data { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] gssl_core::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    /// No seed of an experiment completed; carries the first failure.
    #[error("every seed failed; first error: {message}")]
    SeedsFailed { class: ErrorClass, message: String },
}

pub type Result<T> = std::result::Result<T, GsslError>;

/// Which of the documented exit codes an error maps to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Data,
    Numerical,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Config => 2,
            ErrorClass::Data => 3,
            ErrorClass::Numerical => 4,
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [ErrorClass::Config, ErrorClass::Data, ErrorClass::Numerical]
            .into_iter()
            .find(|c| c.as_str() == name)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorClass::Config => "config",
            ErrorClass::Data => "data",
            ErrorClass::Numerical => "numerical",
        }
    }
}

impl GsslError {
    pub fn data(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        GsslError::Data {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        GsslError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn class(&self) -> ErrorClass {
        use gssl_core::Error as E;
        match self {
            GsslError::Config(_) => ErrorClass::Config,
            GsslError::SeedsFailed { class, .. } => *class,
            GsslError::Data { .. } | GsslError::Io { .. } | GsslError::Json(_) => ErrorClass::Data,
            GsslError::Core(e) => match e {
                E::InvalidParameter(_) => ErrorClass::Config,
                E::InvalidData(_)
                | E::DimensionMismatch { .. }
                | E::IsolatedVertex { .. }
                | E::IndexOutOfRange { .. }
                | E::DuplicateIndex { .. } => ErrorClass::Data,
                E::ZeroRow { .. }
                | E::Singular { .. }
                | E::EigenNotConverged { .. }
                | E::NonFiniteGradient { .. }
                | E::NonFiniteLoss { .. } => ErrorClass::Numerical,
            },
        }
    }
}
