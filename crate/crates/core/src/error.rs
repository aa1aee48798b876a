use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument violates a documented precondition.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Right-hand side evaluated at a parameter where it is undefined.
    #[error("domain error in system `{system}`: {reason}")]
    Domain { system: String, reason: String },

    #[error("parameter {index} = {value} outside box [{lo}, {hi}]")]
    OutOfBox {
        index: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("integration diverged at t = {time}")]
    IntegrationDiverged { time: f64 },

    /// The normal equations (equivalently the matrix J_theta) are singular.
    #[error("parameters not identifiable: J_theta normal matrix is singular (condition number {condition:e})")]
    Identifiability { condition: f64 },

    #[error("estimation failed: {0}")]
    EstimationFailed(String),

    #[error("criterion evaluation failed: {0}")]
    Criterion(Box<Error>),

    #[error("malformed data at line {line}, column {column}: {message}")]
    Parse {
        line: u64,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}
