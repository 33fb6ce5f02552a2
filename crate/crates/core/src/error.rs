use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("not enough partial quotients: need a denominator >= {needed}, largest available is {available}; extend quotients")]
    ExtendQuotients { needed: String, available: String },

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("construction failed at level {level}: {reason}")]
    Construction { level: usize, reason: String },

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("insufficient sieve range: {0}")]
    InsufficientSieveRange(String),

    #[error("singularity hit at orbit index {index} (x = {x:e})")]
    Singularity { index: i64, x: f64 },

    #[error("precision loss: {0}")]
    Precision(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("hypothesis violated at index {index}: {reason}")]
    Hypothesis { index: i64, reason: String },

    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    #[error("bracket failure on interval {interval}: {reason}")]
    Bracket { interval: usize, reason: String },

    #[error("unknown experiment `{name}`; registered: {registry}")]
    UnknownExperiment { name: String, registry: String },

    #[error("config parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("at prime {prime}: {source}")]
    AtPrime { prime: u64, source: Box<Error> },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}
