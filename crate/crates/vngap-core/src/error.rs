use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Power iteration hit the iteration cap on every start vector.
    #[error("operator norm did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite entry at ({row}, {col})")]
    NonFiniteEntry { row: usize, col: usize },

    #[error("expected a unit vector, got norm {norm:.3e}")]
    NonUnitVector { norm: f64 },

    #[error("matrix is not unitary: defect {defect:.3e} exceeds tolerance {tol:.1e}")]
    NotUnitary { defect: f64, tol: f64 },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("tuple rejected: {0}")]
    InvalidTuple(String),

    #[error("grid too coarse: {0} points per dimension (minimum 4)")]
    GridTooCoarse(usize),

    #[error("arity mismatch: {0}")]
    ArityMismatch(String),

    #[error("malformed certificate: {0}")]
    MalformedCertificate(String),

    /// A reassembled quantity contradicts what a certificate claims.
    #[error("internal inconsistency: {0}")]
    Inconsistency(String),
}
