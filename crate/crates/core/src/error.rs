use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("emitter count {n} outside the supported range 1..={max}")]
    RegisterSize { n: usize, max: usize },

    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid couplings: {0}")]
    InvalidCouplings(String),

    #[error("state has support outside the single-excitation sector: {0}")]
    OutsideSector(String),

    #[error("linearly dependent input at position {position} (residual norm {residual:e})")]
    DependentVectors { position: usize, residual: f64 },

    #[error("size guard: {0}")]
    SizeGuard(String),

    #[error("integration failure at t = {time}: {reason}")]
    Integration { time: f64, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("schema error: {0}")]
    Schema(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Integration { .. } | Error::DependentVectors { .. } => 3,
            _ => 2,
        }
    }
}
