use alloc::string::String;

/// Errors reported by every fallible operation in the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("state kind {found} does not match {expected}")]
    KindMismatch {
        expected: &'static str,
        found: &'static str,
    },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("representation not closed: entry ({row}, {col}) of the commutator is {value:e}")]
    NotClosed { row: usize, col: usize, value: f64 },
    #[error("eigenvalue iteration did not converge after {iterations} sweeps")]
    NonConvergence { iterations: usize },
    #[error("maximum step count {max_steps} exceeded at t = {t}")]
    MaxSteps { max_steps: usize, t: f64 },
    #[error("non-finite state encountered; last good time t = {last_good_t}")]
    NonFinite { last_good_t: f64 },
    #[error("unknown coordinate `{0}`")]
    UnknownCoordinate(String),
    #[error("rank-deficient linear system at order {order}: rank {rank} of {rows} rows (nullity {})", rows - rank)]
    RankDeficient {
        order: usize,
        rank: usize,
        rows: usize,
    },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = core::result::Result<T, Error>;
