use thiserror::Error;

/// Errors raised by the simulator and its post-processing stages.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("kernel assumption violated: {0}")]
    Kernel(String),

    #[error("field does not match grid: expected {expected} nodes, got {got}")]
    GridMismatch { expected: usize, got: usize },

    #[error("iterative solve did not converge after {iterations} iterations (last residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("ground-state iteration did not converge after {iterations} iterations (last ratio {ratio})")]
    GammaNonConvergence { iterations: usize, ratio: f64 },

    #[error("memory buffer underflow: {0}")]
    BufferUnderflow(String),

    #[error("invalid configuration:\n  - {}", .0.join("\n  - "))]
    Config(Vec<String>),

    #[error("blow-up or numerical instability detected at step {step} (t = {t})")]
    BlowupOrInstability { step: u64, t: f64 },

    #[error("{0}")]
    Fit(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("run directory {0} already exists (use --force to overwrite)")]
    AlreadyExists(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
