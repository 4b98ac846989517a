use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid scenario parameter `{key}`: {reason}")]
    ScenarioParam { key: String, reason: String },

    #[error("unknown scenario id `{0}`")]
    UnknownScenario(String),

    #[error("unknown protocol id `{0}`")]
    UnknownProtocol(String),

    #[error("invalid schedule: {0}")]
    Schedule(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("protocol violation: {0}")]
    ProtocolViolation(String),

    #[error("response family produced probability {0} outside [0, 1]")]
    FamilyRange(f64),

    #[error("numerical integration did not converge: achieved {achieved:e}, requested {requested:e}")]
    Integration { achieved: f64, requested: f64 },

    #[error("operation not supported for protocol `{0}`")]
    Unsupported(String),
}
