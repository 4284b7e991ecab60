use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("eigen-solver did not converge after {iterations} iterations (matrix norm {norm:.6e})")]
    NoConvergence { iterations: usize, norm: f64 },

    #[error("no steady state found: residual {residual:.3e} exceeds bound {bound:.3e}")]
    Infeasible { residual: f64, bound: f64 },

    #[error("step quality: minimum eigenvalue {min_eigenvalue:.3e} after update (reduce dt)")]
    StepQuality { min_eigenvalue: f64 },

    #[error("trajectory {trajectory}, step {step}: {source}")]
    Trajectory {
        trajectory: usize,
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("internal inconsistency: {0}")]
    Inconsistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
