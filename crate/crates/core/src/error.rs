use thiserror::Error;

/// Failures raised by the moment-bound computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("Hermite degree {0} exceeds the supported maximum of {max}", max = crate::hermite::MAX_DEGREE)]
    DegreeTooLarge(usize),

    #[error("Hermite degree {0} must be odd and at least 3 to have nonzero root squares")]
    NotOddDegree(usize),

    #[error(
        "root refinement for degree {degree} did not converge: found {found} of {expected} roots"
    )]
    RootsNotConverged {
        degree: usize,
        found: usize,
        expected: usize,
    },

    #[error("invalid support: {0}")]
    InvalidSupport(String),

    #[error("moment vector has length {moments}, support has {points} points")]
    LengthMismatch { points: usize, moments: usize },

    #[error("number of matched even moments must be even and positive, got {0}")]
    OddMomentCount(usize),

    #[error("number of matched even moments must be odd and at least 3, got {0}")]
    EvenMomentCount(usize),

    #[error("k = {k} outside the supported range {min}..={max}")]
    OutOfRange { k: usize, min: usize, max: usize },

    #[error("Hankel matrix is singular")]
    SingularHankel,

    #[error("linear system is singular")]
    Singular,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("internal consistency failure: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, Error>;
