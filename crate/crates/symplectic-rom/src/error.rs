//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A vector or matrix had the wrong dimensions for the requested operation.
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: String,
        got: String,
    },

    /// A matrix failed the symplecticity check `‖AᵀJA − J‖_F ≤ tol`.
    #[error("matrix is not symplectic: residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    NotSymplectic { residual: f64, tolerance: f64 },

    /// A matrix failed the orthonormality check `‖ΦᵀΦ − I‖_F ≤ tol`.
    #[error(
        "matrix is not orthonormal: residual {residual:.3e} exceeds tolerance {tolerance:.3e}"
    )]
    NotOrthonormal { residual: f64, tolerance: f64 },

    /// Requested more modes than the data supports.
    #[error("rank deficiency: requested {requested} modes but sigma[{requested}] = {sigma_k:.3e} (sigma_1 = {sigma_1:.3e})")]
    RankDeficient {
        requested: usize,
        sigma_k: f64,
        sigma_1: f64,
    },

    /// An input parameter left its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested integration scheme cannot be applied to this system.
    #[error("unsupported scheme: {0}")]
    Unsupported(String),

    /// A linear solve failed (singular or badly scaled operator).
    #[error("linear solver failure: {0}")]
    Solver(String),

    /// Newton iteration failed to converge within the iteration budget.
    #[error("Newton did not converge after {iters} iterations (last residual {residual:.3e})")]
    NewtonDivergence { residual: f64, iters: usize },

    /// A time step failed; carries the step index and time where it happened.
    #[error("step {step} (t = {time}) failed: {source}")]
    Step {
        step: usize,
        time: f64,
        #[source]
        source: Box<Error>,
    },

    /// Greedy index selection hit a zero residual (dependent basis columns).
    #[error("greedy index selection failed at step {step}: zero residual (dependent columns)")]
    DeimSelection { step: usize },

    /// The sampled interpolation matrix `PᵀΨ` is singular.
    #[error("interpolation matrix PᵀΨ is singular (condition estimate {cond:.3e})")]
    DeimSingular { cond: f64 },

    /// NLP refinement could not reach the symplecticity constraint gate.
    #[error("NLP refinement failed: constraint residual {constraint_residual:.3e} (best objective {best_objective:.6e})")]
    NlpRefinement {
        constraint_residual: f64,
        best_objective: f64,
    },

    /// Two time series could not be aligned onto a common grid.
    #[error("time grid alignment error: {0}")]
    Alignment(String),

    /// A matrix decomposition did not converge.
    #[error("decomposition failure: {0}")]
    Decomposition(String),

    /// Configuration file problem.
    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed data file (CSV matrix, trajectory, ...).
    #[error("parse error in {path}: {detail}")]
    Parse { path: String, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 config, 3 solver, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Parse { .. } => 2,
            Error::Solver(_) | Error::NewtonDivergence { .. } | Error::Step { .. } => 3,
            _ => 1,
        }
    }

    pub(crate) fn dims(context: &'static str, expected: impl ToString, got: impl ToString) -> Self {
        Error::DimensionMismatch {
            context,
            expected: expected.to_string(),
            got: got.to_string(),
        }
    }
}
