use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Invalid parameters: truncation width, tolerances, step sizes, shifts.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Eigensolver did not converge.
    #[error("eigensolver failed to converge at index {index} after {iterations} iterations")]
    Numeric { index: usize, iterations: usize },

    /// Argument outside the domain of an operation (site out of range, empty grid, zero norm).
    #[error("domain error: {0}")]
    Domain(String),

    /// A mode without definite parity cannot carry a Mathieu label.
    #[error("mode {mode} has no definite parity and cannot be labelled")]
    Labeling { mode: usize },

    /// A mode whose edge coefficients exceed the tail tolerance.
    #[error("mode {mode} is truncation-contaminated (edge coefficient {edge:e} > {tail_tol:e})")]
    Contaminated { mode: usize, edge: f64, tail_tol: f64 },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),
}
