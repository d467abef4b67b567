//! Error types shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("domain error in `{node}`: {message}")]
    Domain { node: String, message: String },

    #[error("metric is not positive definite at {point:?}: smallest eigenvalue {min_eig:e} (largest {max_eig:e})")]
    NonSpdMetric {
        point: Vec<f64>,
        min_eig: f64,
        max_eig: f64,
    },

    #[error("metric inverse check failed at {point:?}: max |g g^-1 - I| = {defect:e}")]
    MetricInverse { point: Vec<f64>, defect: f64 },

    #[error("chart has no complex structure but `{operation}` requires one")]
    MissingComplexStructure { operation: String },

    #[error("zero tangent vector passed to `{operation}`")]
    ZeroVector { operation: String },

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    Dimension {
        context: String,
        expected: usize,
        got: usize,
    },

    #[error(
        "rank detection is ambiguous at {point:?}: singular values {sigmas:?} have entries within \
         a factor 10 of the threshold {threshold:e}; retry with a different rank_tol"
    )]
    RankAmbiguous {
        point: Vec<f64>,
        sigmas: Vec<f64>,
        threshold: f64,
    },

    #[error("numeric rank changed from {expected} to {got} at {point:?}")]
    RankChanged {
        point: Vec<f64>,
        expected: usize,
        got: usize,
    },

    #[error("frame is degenerate: candidate vectors span less than the requested {wanted} dimensions")]
    DegenerateFrame { wanted: usize },

    #[error("vector field is not normal to range F_* at {point:?}: tangential norm {tangency:e} exceeds {limit:e}")]
    NotNormal {
        point: Vec<f64>,
        tangency: f64,
        limit: f64,
    },

    #[error("unknown check `{name}`; valid names: {valid}")]
    UnknownCheck { name: String, valid: String },

    #[error("unknown gallery scenario `{name}`; valid names: {valid}")]
    UnknownScenario { name: String, valid: String },

    #[error("invalid scenario manifest:\n{}", .0.join("\n"))]
    Manifest(Vec<String>),

    #[error("{0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}
