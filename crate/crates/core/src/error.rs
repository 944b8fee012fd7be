use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh parameters: {0}")]
    InvalidMesh(String),
    #[error("index {index} out of range (len {len})")]
    OutOfRange { index: usize, len: usize },
    #[error("projection undefined: point coincides with the surface center")]
    ProjectionUndefined,
    #[error("cell not cut: nodal values do not change sign")]
    CellNotCut,
    #[error("normal vector is not of unit length (|n| = {0})")]
    NonUnitNormal(f64),
    #[error("stabilization parameter must be non-negative, got {0}")]
    NegativeTau(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix diagonal is identically zero")]
    ZeroDiagonal,
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    Asymmetric(f64),
    #[error("singular system: pivot {pivot:e} at column {column}")]
    Singular { column: usize, pivot: f64 },
    #[error("solver did not converge: relative residual {residual:e} after {iterations} iterations")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("no eigenvalue above the positivity threshold {0:e}")]
    NoPositiveEigenvalue(f64),
    #[error("eigensolver failed: {0}")]
    Eigensolver(String),
    #[error("invalid rate input: {0}")]
    InvalidRates(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
