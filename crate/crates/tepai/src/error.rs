use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    /// Bad configuration or arguments; `field` is a dotted path.
    #[error("{field}: {message}")]
    Validation { field: String, message: String },
    #[error(transparent)]
    Core(#[from] tepai_core::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: String, message: String },
    /// A run directory whose summary does not follow from its shot log.
    #[error("audit failed: {0}")]
    Audit(String),
}

pub type AppResult<T> = std::result::Result<T, AppError>;

impl AppError {
    pub fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        AppError::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 validation, 3 resource limit, 4 numerical failure, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        use tepai_core::Error as E;
        match self {
            AppError::Validation { .. } | AppError::Format { .. } => 2,
            AppError::Io { .. } | AppError::Audit(_) => 1,
            AppError::Core(e) => match e {
                E::DenseLimit { .. } | E::StatevectorLimit { .. } => 3,
                E::Numerical(_) => 4,
                _ => 2,
            },
        }
    }
}
