use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid price grid: {0}")]
    InvalidGrid(String),

    #[error("invalid demand parameters: {0}")]
    InvalidDemand(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid policy: {0}")]
    InvalidPolicy(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("instance too large for exhaustive search: {candidates} core price vectors exceed cap {cap}; use the FPTAS instead")]
    InstanceTooLarge { candidates: u128, cap: u64 },

    #[error("scenario file error: {0}")]
    Io(#[from] std::io::Error),

    #[error("scenario file parse error: {0}")]
    Parse(#[from] serde_json::Error),
}
