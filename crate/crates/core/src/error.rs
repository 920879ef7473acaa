use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric (residual {residual:e})")]
    NotSymmetric { residual: f64 },

    #[error("Φ violates ΦᵗJ + JΦ = 0 (residual {residual:e}, tolerance {tol:e})")]
    SpResidual { residual: f64, tol: f64 },

    #[error("matrix is singular")]
    Singular,

    #[error("eigenvalue iteration did not converge")]
    NoConvergence,

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },

    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(&'static str),

    #[error("state does not match form {0}")]
    FormMismatch(&'static str),

    #[error("stationary-point preconditions violated: {0}")]
    NotStationary(String),

    #[error("polynomial parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}
