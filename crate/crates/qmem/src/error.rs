use thiserror::Error;

/// Error type for every fallible operation in the crate.
#[derive(Debug, Error)]
pub enum QmemError {
    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("under-resolved input: {0}")]
    UnderResolved(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite field values after {0}")]
    NonFinite(String),

    #[error("dense map refused: {0}")]
    DenseMapTooLarge(String),

    #[error("unseparable bands: {0}")]
    UnseparableBands(String),

    #[error("config error at line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("config error: {0}")]
    ConfigGeneral(String),

    #[error("unknown preset: {0}")]
    UnknownPreset(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("{0}")]
    Format(String),
}

impl QmemError {
    /// Process exit code associated with the error: 2 for configuration
    /// problems, 1 for runtime/solver failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            QmemError::Config { .. }
            | QmemError::ConfigGeneral(_)
            | QmemError::UnknownPreset(_)
            | QmemError::Grid(_)
            | QmemError::Parameter(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, QmemError>;
