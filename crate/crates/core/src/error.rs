use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// Every variant carries enough context to name the violated hypothesis;
/// the CLI maps `Validation`-style variants to exit code 2 and numerical
/// failures to exit code 1.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("point ({x}, {y}) is not on the domain boundary")]
    NotOnBoundary { x: f64, y: f64 },

    #[error("grid functions live on different geometries")]
    GeometryMismatch,

    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },

    #[error("non-finite value at ray {ray}, node {node}")]
    NonFinite { ray: usize, node: usize },

    #[error("weight must be strictly positive, found {value} at ray {ray}, node {node}")]
    NonPositiveWeight { value: f64, ray: usize, node: usize },

    #[error("Hölder exponent λ = {lambda} must satisfy α < λ ≤ 1 (α = {alpha})")]
    HolderExponent { lambda: f64, alpha: f64 },

    #[error("ellipticity a^ij ξ_i ξ_j ≥ a0 |ξ|² with a0 > 0 fails: smallest sampled eigenvalue {a0} at ({x}, {y})")]
    Ellipticity { a0: f64, x: f64, y: f64 },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("matrix is not self-adjoint in its weighted inner product (relative asymmetry {asymmetry:e})")]
    NotSelfAdjoint { asymmetry: f64 },

    #[error("eigensolver did not converge: {0}")]
    NoConvergence(String),

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("form ordering violated on validation field {index}: {detail}")]
    OrderingViolated { index: usize, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
