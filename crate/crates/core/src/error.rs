use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension must be an odd positive integer, got {0}")]
    InvalidDimension(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("ordering parameter |s| = {0} exceeds 1")]
    OrderParamOutOfRange(f64),

    #[error("theta function needs a positive lattice parameter, got a = {0}")]
    ThetaDomain(f64),

    #[error("expected a phase-space function with s = {expected}, got s = {found}")]
    OrderMismatch { expected: String, found: String },

    #[error("{0} has no inverse modulo {1}")]
    NoModularInverse(i64, usize),

    #[error("symplectic parameters violate z1*z4 - z2*z3 = 1 mod {0}")]
    NotSymplectic(usize),

    #[error("degenerate line: both line coefficients vanish mod {0}")]
    DegenerateLine(usize),

    #[error("ray coverage fails for composite dimension {0}; tomography needs a prime dimension")]
    Coverage(usize),

    #[error("number-state index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("dimension {dim} exceeds the limit {limit} for {what}")]
    TooLarge { what: &'static str, dim: usize, limit: usize },

    #[error("not a density operator: {0}")]
    NotPhysical(String),

    #[error("formalism violation: {0}")]
    Formalism(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
