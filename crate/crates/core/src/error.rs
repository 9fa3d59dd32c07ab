use thiserror::Error;

/// Errors surfaced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("function lives on mesh generation {found} ({found_len} nodes) but mesh generation {expected} ({expected_len} nodes) was expected")]
    MeshMismatch {
        expected: u64,
        expected_len: usize,
        found: u64,
        found_len: usize,
    },

    #[error("conjugate gradient did not converge: relative residual {residual:.3e} after {iterations} iterations")]
    CgNotConverged { iterations: usize, residual: f64 },

    #[error("path {path} (seed {seed}) failed at t = {time:.6e}: {reason}")]
    PathFailed {
        path: usize,
        seed: u64,
        time: f64,
        reason: String,
    },

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
