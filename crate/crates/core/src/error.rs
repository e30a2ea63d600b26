use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("argument {x} outside the domain of {what}")]
    Domain { what: &'static str, x: f64 },
    #[error("series did not converge within {terms} terms (last term {last_term:e})")]
    Convergence { terms: usize, last_term: f64 },
    #[error("coincident source and target (separation {0:e})")]
    Singularity(f64),
    #[error("geometry: {0}")]
    Geometry(String),
    #[error("quadrature: {0}")]
    Quadrature(String),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("GMRES stopped after {iterations} iterations at relative residual {relres:e}")]
    Solver {
        iterations: usize,
        relres: f64,
        history: Vec<f64>,
    },
    #[error("eigenvalue iteration did not converge")]
    Eigen,
    #[error("target {index} is {distance:e} from the boundary (minimum {min:e})")]
    TargetTooClose { index: usize, distance: f64, min: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
