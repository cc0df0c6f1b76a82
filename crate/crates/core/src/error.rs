use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("invalid tolerance configuration: {0}")]
    InvalidTolerance(String),

    #[error("eigenvalue solver failed to converge")]
    EigenFailure,

    #[error("spectral cluster not separated from the rest of the spectrum: {0}")]
    ClusterNotSeparated(String),

    #[error("eigenvalue of modulus {modulus:.6e} sits on the cut circle |mu| = {cut:.6e}")]
    EigenvalueOnCut { modulus: f64, cut: f64 },

    #[error("complex invariant violated in degree {degree}: {detail}")]
    InvalidComplex { degree: usize, detail: String },

    #[error("singular restricted Laplacian in degree {0}")]
    SingularLaplacian(usize),

    #[error("degenerate torsion: {0}")]
    DegenerateTorsion(String),

    #[error("determinant line mismatch: {0}")]
    LineMismatch(String),

    #[error("exact sequence failure: {0}")]
    ExactnessFailure(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("zeta evaluation error: {0}")]
    ZetaDomain(String),
}

pub type Result<T> = std::result::Result<T, Error>;
