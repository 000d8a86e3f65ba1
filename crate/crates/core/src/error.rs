//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TwirlError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    #[error("not a valid group table: {0}")]
    InvalidTable(String),

    #[error("not a group: {0}")]
    NotAGroup(String),

    #[error("not a unitary representation: {0}")]
    InvalidRepresentation(String),

    #[error("operands belong to different groups")]
    MismatchedGroups,

    #[error("invalid group action: {0}")]
    InvalidAction(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("not a valid channel: {0}")]
    InvalidChannel(String),

    #[error("not trace preserving: defect {defect:.3e}")]
    NotTracePreserving { defect: f64 },

    #[error("not completely positive: Choi eigenvalue {min_eigenvalue:.3e}")]
    NotCompletelyPositive { min_eigenvalue: f64 },

    #[error("decomposition failed: {0}")]
    DecompositionFailed(String),

    #[error(
        "random commutant element stayed degenerate after {retries} retries (spectral gap below {threshold:.3e})"
    )]
    DegenerateCommutantElement { retries: usize, threshold: f64 },

    #[error("decomposition inconsistent: {0}")]
    DecompositionInconsistent(String),

    #[error("certificate check failed: {0}")]
    CertificateFailed(String),

    #[error("witness verification failed: {kind}: worst residual {residual:.3e} exceeds {threshold:.3e}")]
    WitnessFailed {
        kind: String,
        residual: f64,
        threshold: f64,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
