use thiserror::Error;

/// Errors surfaced by the numerical kernels and checks.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: String, right: String },

    #[error("matrix is not positive semidefinite: min eigenvalue {min_eig:.3e} below -{tol:.3e}")]
    NotPsd { min_eig: f64, tol: f64 },

    #[error("matrix is not positive definite: min eigenvalue {min_eig:.3e} not above {tol:.3e}")]
    NotPd { min_eig: f64, tol: f64 },

    #[error("{op}: domain error: {detail}")]
    Domain { op: &'static str, detail: String },

    #[error("{op} failed to meet its residual contract: residual {residual:.3e} exceeds {bound:.3e}")]
    NumericalFailure {
        op: &'static str,
        residual: f64,
        bound: f64,
    },

    #[error("{op}: iteration cap of {cap} sweeps exceeded (off-diagonal residual {residual:.3e})")]
    NoConvergence {
        op: &'static str,
        cap: usize,
        residual: f64,
    },

    #[error("degenerate instance: {0}")]
    Degenerate(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("singular matrix: smallest singular value {sigma_min:.3e} at or below {tol:.3e}")]
    Singular { sigma_min: f64, tol: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{0}")]
    Parse(#[from] crate::dsl::ParseError),

    #[error("evaluation error: {0}")]
    Eval(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("record {line}: {detail}")]
    CorruptRecord { line: usize, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;
