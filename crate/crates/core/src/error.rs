use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("capacity exceeded: {what} needs {count} but the cap is {cap}")]
    Capacity {
        what: &'static str,
        count: u128,
        cap: u128,
    },

    #[error("element ({agent}, {item}) outside ground set of {agents} agents x {items} items")]
    OutOfRange {
        agent: usize,
        item: usize,
        agents: usize,
        items: usize,
    },

    #[error(
        "not incentive compatible: agent {agent} at profile {profile:?} gains {gain} by reporting type {report}"
    )]
    NotIncentiveCompatible {
        agent: usize,
        profile: Vec<usize>,
        report: usize,
        gain: String,
    },

    #[error("table at agent {agent}, opponents {opponents:?} is inconsistent with every deterministic tie rule")]
    TieInconsistent { agent: usize, opponents: Vec<usize> },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("linear program: {0}")]
    Lp(String),

    #[error("json: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
