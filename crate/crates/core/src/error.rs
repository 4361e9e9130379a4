use thiserror::Error;

pub type Result<T, E = PricingError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PricingError {
    #[error("customer {0} cannot afford the assigned set")]
    BudgetViolation(usize),
    #[error("item {0} is assigned beyond its capacity")]
    CapacityViolation(usize),
    #[error("customer {0} holds a set that is not a path/interval of the instance")]
    ShapeViolation(usize),
    #[error("operation not supported for this valuation encoding: {0}")]
    UnsupportedEncoding(&'static str),
    #[error("LP is infeasible")]
    Infeasible,
    #[error("LP is unbounded")]
    Unbounded,
    #[error("numeric failure: {0}")]
    NumericFailure(String),
    #[error("enumeration budget exceeded: {size} > {budget}")]
    BudgetExceeded { size: u128, budget: u128 },
    #[error("instance is not a tree: {0}")]
    NotATree(String),
    #[error("gap verifier broke its contract: {0}")]
    VerifierContractBroken(String),
    #[error("trim mode does not match the instance: {0}")]
    ModeMismatch(String),
    #[error("chain prices are not monotone at position {0}")]
    MonotoneViolation(usize),
    #[error("column generation made no progress: {0}")]
    NoProgress(String),
    #[error("customer {0} holds no item private to its set")]
    NoPrivateItem(usize),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<serde_json::Error> for PricingError {
    fn from(e: serde_json::Error) -> Self {
        PricingError::Parse(e.to_string())
    }
}

impl From<std::io::Error> for PricingError {
    fn from(e: std::io::Error) -> Self {
        PricingError::Io(e.to_string())
    }
}
