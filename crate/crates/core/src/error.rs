use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("ambient dimension mismatch: {left} vs {right}")]
    Ambient { left: usize, right: usize },
    #[error("{0} is not contained in the enclosing space")]
    NotContained(String),
    #[error("subspaces intersect non-trivially (dimension {0})")]
    NotDirect(usize),
    #[error("matrix is not skew-symmetric (residual {0:e})")]
    NotSkew(f64),
    #[error("singular system: {0}")]
    Singular(String),
    #[error("point {0:?} lies outside the chart domain")]
    OutsideChart(Vec<f64>),
    #[error("value not representable in exact mode: {0}")]
    NotExact(String),
    #[error("conformal generator passed where an isometric one is required: {0}")]
    Conformal(String),
    #[error("degenerate form: {0}")]
    Degenerate(String),
    #[error("certificate `{name}` failed (residual {residual:e})")]
    Certificate { name: String, residual: f64 },
    #[error("ODE integration failed: {0}")]
    Integration(String),
    #[error("invalid input: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;
