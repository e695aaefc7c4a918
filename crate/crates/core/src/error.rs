use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unsupported feature at line {line}: {msg}")]
    Unsupported { line: usize, msg: String },

    #[error("topology error: {0}")]
    Topology(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("eigensolver failed to converge: {0}")]
    Eigen(String),

    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("descent stalled: {0}")]
    Stall(String),

    #[error("mesh quality collapse: {0}")]
    Quality(String),

    #[error("collar error: {0}")]
    Collar(String),

    #[error("not a sweepout: {0}")]
    NotASweepout(String),

    #[error("selection failure: {0}")]
    Selection(String),

    #[error("undefined: {0}")]
    Undefined(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serialization(#[from] serde_json::Error),
}

impl Error {
    /// Stable lowercase tag for machine-parseable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parameter(_) => "parameter",
            Error::Parse { .. } => "parse",
            Error::Unsupported { .. } => "unsupported",
            Error::Topology(_) => "topology",
            Error::Domain(_) => "domain",
            Error::Eigen(_) => "eigen",
            Error::Inconclusive(_) => "inconclusive",
            Error::Precondition(_) => "precondition",
            Error::Stall(_) => "stall",
            Error::Quality(_) => "quality",
            Error::Collar(_) => "collar",
            Error::NotASweepout(_) => "not-a-sweepout",
            Error::Selection(_) => "selection",
            Error::Undefined(_) => "undefined",
            Error::Io(_) => "io",
            Error::Serialization(_) => "serialization",
        }
    }
}
