use thiserror::Error;

/// Errors shared by every module in the crate.
#[derive(Debug, Clone, Error)]
pub enum FracError {
    /// Evaluation at a pole of the gamma function (non-positive integer argument).
    #[error("gamma pole at x = {0}")]
    GammaPole(f64),

    /// Argument outside the documented domain of an operator.
    #[error("domain error: {0}")]
    Domain(String),

    /// A series or iterative scheme failed to meet its tail bound within the
    /// iteration cap.
    #[error("no convergence: {0}")]
    NonConvergence(String),

    /// The achievable error bound exceeds the requested absolute tolerance.
    #[error("tolerance not met: bound {bound:e} exceeds requested {requested:e}")]
    ToleranceNotMet { bound: f64, requested: f64 },

    /// A sampled grid that violates its contract (size, shape, point count).
    #[error("grid error: {0}")]
    Grid(String),

    /// A closed form requested outside its admissible (n, s) branch.
    #[error("branch error: {0}")]
    Branch(String),

    /// Input/output failure (report writing, cache handling).
    #[error("io error: {0}")]
    Io(String),
}

pub type FracResult<T> = Result<T, FracError>;
