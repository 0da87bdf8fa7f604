use thiserror::Error;

/// Errors raised anywhere in the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate LFSR state")]
    DegenerateLfsrState,
    #[error("polynomial {poly:#b} is not primitive: period {period} instead of {expected}")]
    NotPrimitive { poly: u32, period: usize, expected: usize },
    #[error("polynomials {0:#b} and {1:#b} are not a preferred pair")]
    NotPreferredPair(u32, u32),
    #[error("code length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("requested {requested} codes but the family only has {available}")]
    FamilyTooSmall { requested: usize, available: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("degenerate despreader: all weights are zero")]
    DegenerateDespreader,
    #[error("CMA divergence on user {user}, subcarrier {subcarrier} at symbol {symbol}")]
    CmaDivergence { user: usize, subcarrier: usize, symbol: usize },
    #[error("instance too large for brute-force oracle: {0}")]
    InstanceTooLarge(String),
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
