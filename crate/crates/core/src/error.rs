use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("order {order} is outside the supported range 1..={max}")]
    OrderOutOfRange { order: usize, max: usize },

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid tableau {name}: {}", issues.join("; "))]
    InvalidTableau { name: String, issues: Vec<String> },

    #[error("unknown method {0:?}")]
    UnknownMethod(String),

    #[error("unknown problem {0:?}")]
    UnknownProblem(String),

    #[error("integration diverged at t = {time} in stage {stage}")]
    Divergence { time: f64, stage: usize },

    #[error("reference trajectory has no sample at t = {0}")]
    Alignment(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
