use thiserror::Error;

use crate::rat::RatError;

pub type Result<T, E = GameError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    /// Job `job` (0-based) has no machine with a finite processing time.
    #[error("job {} has an empty strategy set", .job + 1)]
    EmptyStrategySet { job: usize },
    #[error("processing-time matrix contradicts the environment: {0}")]
    InconsistentEnvironment(String),
    #[error("malformed input: {0}")]
    InvalidInput(String),
    #[error("job {} cannot run on machine {}", .job + 1, .machine + 1)]
    ForbiddenMachine { job: usize, machine: usize },
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("no potential is defined for policy {policy} on {environment}")]
    NoPotentialDefined { policy: String, environment: String },
    #[error("coalition search exceeded its budget of {budget} joint moves")]
    CombinatorialLimit { budget: u64 },
    #[error("search space of {required} exceeds the budget of {budget}")]
    BudgetExceeded { required: String, budget: u64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Arithmetic(#[from] RatError),
}

impl GameError {
    /// Stable machine-readable code used in CLI error records.
    pub fn code(&self) -> &'static str {
        match self {
            GameError::EmptyStrategySet { .. } => "EMPTY_STRATEGY_SET",
            GameError::InconsistentEnvironment(_) => "INCONSISTENT_ENVIRONMENT",
            GameError::InvalidInput(_) => "INVALID_INPUT",
            GameError::ForbiddenMachine { .. } => "FORBIDDEN_MACHINE",
            GameError::InvalidProfile(_) => "INVALID_PROFILE",
            GameError::NoPotentialDefined { .. } => "NO_POTENTIAL_DEFINED",
            GameError::CombinatorialLimit { .. } => "COMBINATORIAL_LIMIT",
            GameError::BudgetExceeded { .. } => "BUDGET_EXCEEDED",
            GameError::InvalidParameter(_) => "INVALID_PARAMETER",
            GameError::Arithmetic(_) => "ARITHMETIC",
        }
    }

    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            GameError::CombinatorialLimit { .. } | GameError::BudgetExceeded { .. }
        )
    }
}
