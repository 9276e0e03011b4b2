use thiserror::Error;

/// Errors surfaced by the simulator and optimizers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("negative transmit power {value} for UE {ue}")]
    NegativePower { ue: usize, value: f64 },

    #[error("invalid power configuration: {0}")]
    PowerConfig(String),

    #[error("matrix is singular or not positive definite: {0}")]
    Singular(String),

    #[error("no strictly feasible power vector: {0}")]
    Infeasible(String),

    #[error("structurally invalid move: {0}")]
    InvalidMove(String),

    #[error("size guard violated: {0}")]
    Guard(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParam {
        name,
        reason: reason.into(),
    }
}
