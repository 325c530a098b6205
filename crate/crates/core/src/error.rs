use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid grid, problem or scheme configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// An operation was called with inputs violating its precondition.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A stage produced non-finite values.
    #[error("non-finite value in stage {stage} at t = {time}")]
    NonFinite { stage: usize, time: f64 },

    /// Iterative root finding failed.
    #[error("root finding did not converge: {0}")]
    Convergence(String),

    /// A limited update left the admissible range although the time step
    /// satisfied the bound-preserving CFL condition.
    #[error("bound violation of {amount:e} in cell {cell} after limiting")]
    BoundViolation { cell: usize, amount: f64 },

    /// Singular matrix in the internal SSP check.
    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
