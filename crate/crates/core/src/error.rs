use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("infrared grid error: {0}")]
    InfraredGrid(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("window [{low}, {high}] intersects the threshold set at {threshold}")]
    ThresholdCollision { low: f64, high: f64, threshold: f64 },

    #[error("kernel is not differentiable along dilations: {0}")]
    NotDifferentiable(String),

    #[error("eigensolver did not converge after {iterations} iterations (best residual {best_residual:e})")]
    Solver { iterations: usize, best_residual: f64 },
}
