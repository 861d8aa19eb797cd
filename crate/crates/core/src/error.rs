use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid network: {0}")]
    Validation(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("power flow did not converge after {iterations} iterations (max mismatch {mismatch:.3e} p.u.)")]
    Divergence { iterations: usize, mismatch: f64 },

    #[error("singular load-flow Jacobian at this operating point")]
    SingularJacobian,

    #[error("dispatch LP is {status}: {hint}")]
    Dispatch { status: String, hint: String },

    #[error("simulation aborted at step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
        state: String,
    },

    #[error("empty input")]
    Empty,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
