use thiserror::Error;

/// Domain failures of the screening calculations.
///
/// Every variant has a stable [`ScreeningError::name`] that front ends
/// (CLI, HTTP) surface verbatim.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScreeningError {
    #[error("{field} must be a probability in [0, 1], got {value}")]
    InvalidProbability { field: &'static str, value: f64 },

    #[error("specificity is 1: the positive likelihood ratio a/(1-b) is undefined")]
    SpecificityOne,

    #[error("the observed result has probability zero under this test and prior")]
    DegenerateTest,

    #[error("sensitivity + specificity = 1: the prevalence threshold is undefined")]
    EpsilonOne,

    #[error("target {target} cannot be reached from prior {prior} by any finite number of positive results")]
    InfeasibleTarget { target: f64, prior: f64 },

    #[error("target must lie in (0, 1], got {0}")]
    InvalidTarget(f64),

    #[error("number of test iterations must be at least 1")]
    InvalidIterationCount,

    #[error("invalid axis: {0}")]
    InvalidAxis(String),

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
}

impl ScreeningError {
    pub fn name(&self) -> &'static str {
        match self {
            Self::InvalidProbability { .. } => "InvalidProbability",
            Self::SpecificityOne => "SpecificityOne",
            Self::DegenerateTest => "DegenerateTest",
            Self::EpsilonOne => "EpsilonOne",
            Self::InfeasibleTarget { .. } => "InfeasibleTarget",
            Self::InvalidTarget(_) => "InvalidTarget",
            Self::InvalidIterationCount => "InvalidIterationCount",
            Self::InvalidAxis(_) => "InvalidAxis",
            Self::InvalidConfig(_) => "InvalidConfig",
        }
    }
}

pub type Result<T, E = ScreeningError> = std::result::Result<T, E>;
