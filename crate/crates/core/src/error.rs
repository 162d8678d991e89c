use thiserror::Error;

use crate::role::Role;

/// A configuration value outside its allowed domain.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid configuration: `{field}` {reason}")]
pub struct ConfigError {
    pub field: String,
    pub reason: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, reason: impl Into<String>) -> Self {
        ConfigError {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("incomplete turn: no order submitted for human seat {0}")]
    IncompleteTurn(Role),
    #[error("game finished after week {0}")]
    Finished(u32),
    #[error("{0} is played by a human; its orders cannot be computed by an agent")]
    HumanPolicy(Role),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("no week records")]
    EmptyRecords,
    #[error("order dispersion needs at least 2 weeks, got {0}")]
    TooFewWeeks(usize),
    #[error("external demand has zero variance; bullwhip ratio undefined")]
    ZeroDemandVariance,
    #[error("{labels} labels for {runs} runs")]
    LabelMismatch { labels: usize, runs: usize },
    #[error("group table needs at least one run")]
    EmptyGroup,
}
