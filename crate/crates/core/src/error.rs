use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The energy level sits on (or outside) the boundary of the periodic family.
    #[error("degenerate energy level c0 = {c0} (periodic orbits need 0 < c0 < {upper})")]
    DegenerateLevel { c0: f64, upper: f64 },

    #[error("no solution: {0}")]
    NoSolution(String),

    /// A closed-form expression hits one of its poles.
    #[error("singular expression: {0}")]
    Singular(String),

    #[error("insufficient resolution: {0}")]
    Resolution(String),

    #[error("quadrature did not converge: estimated error {error:e} exceeds tolerance {tolerance:e}")]
    Quadrature { error: f64, tolerance: f64 },

    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("spectral truncation too coarse: off-grid residual {residual:e} exceeds {limit:e}")]
    Truncation { residual: f64, limit: f64 },

    #[error("singular Jacobian (pivot ratio {0:e})")]
    SingularJacobian(f64),

    #[error("lattice incompatible with travelling wave: {0}")]
    Incompatible(String),

    #[error("continuation step underflow at parameter {param}")]
    StepUnderflow { param: f64 },

    #[error("eigenvalue computation failed: {0}")]
    Eigen(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
