use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A structure spec that cannot be realized (bad case/m combination,
    /// vanishing multiplicity, repeated eigenvalues).
    #[error("invalid structure: {0}")]
    InvalidStructure(String),

    #[error("tensor fails the affine curvature symmetries (antisymmetry defect {antisymmetry:e}, Bianchi defect {bianchi:e})")]
    NotCurvature { antisymmetry: f64, bianchi: f64 },

    #[error("connection has torsion: Gamma_{{{i}{j}}}^{k} != Gamma_{{{j}{i}}}^{k}")]
    Torsion { i: usize, j: usize, k: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// An internal consistency check failed; indicates a bug or an input
    /// outside the supported theory.
    #[error("inconsistency: {0}")]
    Inconsistency(String),

    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
