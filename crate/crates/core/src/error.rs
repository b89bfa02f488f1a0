use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// `1 - beta * b` fell below the requested floor somewhere on the grid.
    #[error("nonpositive depth: 1 - beta*b = {value:.6e} at x = {x:.6} (node {index}), floor {floor:.6e}")]
    NonpositiveDepth {
        index: usize,
        x: f64,
        value: f64,
        floor: f64,
    },

    /// Total depth `1 + eps*zeta - beta*b` vanished during an evolution.
    #[error("blow-down: total depth {value:.6e} at x = {x:.6} (node {index})")]
    BlowDown { index: usize, x: f64, value: f64 },

    #[error("wrong solver path: {0}")]
    WrongSolverPath(String),

    /// The integrand of a left-anchored antiderivative does not decay at the left edge.
    #[error("domain too small: |f| reaches {edge_max:.3e} in the left edge band (tolerance {tol:.3e})")]
    DomainTooSmall { edge_max: f64, tol: f64 },

    #[error("instability at step {step}: norm grew by a factor {growth:.3e}")]
    Instability { step: usize, growth: f64 },

    #[error("numerical failure at step {step}: non-finite state")]
    NumericalFailure { step: usize },

    #[error("elliptic solve did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    SolverFailure { iterations: usize, residual: f64 },

    #[error("reconstruction singularity: c^2 + eps*zeta = {value:.6e} at node {index}")]
    ReconstructionSingularity { index: usize, value: f64 },

    #[error("trajectory carries no time derivatives")]
    MissingRhs,

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
}
