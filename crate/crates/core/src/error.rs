use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum EbfError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("leading coefficient is zero; use a lower-degree solve")]
    DegeneratePolynomial,

    #[error("no stationary point located in [{lo:e}, {hi:e}] (p2={p2}, q={q})")]
    NoStationaryPoint { lo: f64, hi: f64, p2: f64, q: f64 },

    #[error("shape mismatch: expected {expected} values, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("no convergence-guaranteed surrogate for this hyperprior; pass an explicit override")]
    NoGuaranteedSurrogate,

    #[error("gamma subproblem has no positive root (x={x}, gamma_k={gamma_k}, q_tilde={q_tilde})")]
    SubproblemNoRoot { x: f64, gamma_k: f64, q_tilde: f64 },

    #[error("objective became non-finite ({value}) at iteration {iteration}")]
    NonFiniteObjective { iteration: usize, value: f64 },

    #[error("ground truth has zero norm")]
    ZeroNormTruth,

    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },

    #[error("malformed PGM: {0}")]
    Pgm(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, EbfError>;
