use thiserror::Error;

/// First constraint of the feasible antenna set that a position list breaks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PatternViolation {
    #[error("expected {expected} antenna positions, found {found}")]
    Length { expected: usize, found: usize },
    #[error("antenna {index} at x = {position} m lies outside the waveguide span [{lo}, {hi}]")]
    OutOfSpan {
        index: usize,
        position: f64,
        lo: f64,
        hi: f64,
    },
    #[error("antenna {index} at x = {position} m is not to the right of antenna {prev}", prev = index - 1)]
    Ordering { index: usize, position: f64 },
    #[error("gap {gap} m between antennas {prev} and {index} is below the minimum spacing {min_spacing} m", prev = index - 1)]
    Spacing {
        index: usize,
        gap: f64,
        min_spacing: f64,
    },
    #[error("antenna {index} has a non-finite position")]
    NonFinite { index: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("invalid search configuration: {0}")]
    InvalidSearchConfig(String),
    #[error(transparent)]
    InvalidPattern(#[from] PatternViolation),
    #[error("waveguide span {span} m cannot hold {antennas} antennas at spacing {min_spacing} m")]
    SpanTooShort {
        span: f64,
        antennas: usize,
        min_spacing: f64,
    },
    #[error("user index {index} out of range for {users} users")]
    UserIndex { index: usize, users: usize },
    #[error("antenna coincides with the user position")]
    ZeroDistance,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
