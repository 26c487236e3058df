use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("a design needs at least 2 groups, got {0}")]
    TooFewGroups(usize),

    #[error("group {group} has {size} observation(s); every group needs n_i >= 2")]
    GroupTooSmall { group: usize, size: usize },

    #[error("observation {index} is not finite ({value})")]
    NonFinite { index: usize, value: f64 },

    #[error("expected {expected} observations for this design, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("group index {index} out of range for {k} groups")]
    GroupIndex { index: usize, k: usize },

    #[error("between-group statistic needs two distinct groups, got {0} twice")]
    SameGroup(usize),

    /// Every group is internally constant, so the within-treatment
    /// variance estimate is zero and the statistic is undefined.
    #[error("within-treatment variance is zero; the test statistic is undefined")]
    DegenerateWithinVariance,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
