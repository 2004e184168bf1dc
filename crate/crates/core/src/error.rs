use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {left} vs {right}")]
    DimensionMismatch {
        op: &'static str,
        left: usize,
        right: usize,
    },
    #[error("matrix must be square and non-empty, got {rows} rows with {cols} columns")]
    NotSquare { rows: usize, cols: usize },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("kronecker product dimension {left} x {right} overflows")]
    DimensionOverflow { left: usize, right: usize },
    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },
    #[error("matrix is numerically singular at pivot {index} (|pivot| = {pivot:e})")]
    Singular { index: usize, pivot: f64 },
    #[error("boson truncation must be at least 2, got {0}")]
    InvalidTruncation(usize),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("invalid density matrix: {0}")]
    InvalidState(String),
    #[error("expectation value has imaginary part {imag:e} (Hermiticity lost)")]
    ComplexExpectation { imag: f64 },
    #[error("superoperator needs D <= {max}, got D = {dim}; apply the generator directly instead")]
    SuperoperatorTooLarge { dim: usize, max: usize },
    #[error("steady state is not unique: {0}")]
    DegenerateSteadyState(String),
    #[error("integration diverged at t = {time}: {reason}; reduce dt")]
    Diverged { time: f64, reason: String },
    #[error("{0}")]
    NotApplicable(String),
}
