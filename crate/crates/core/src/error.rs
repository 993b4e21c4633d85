use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("incompatible exponent lattices: sigma = 1/{left} vs sigma = 1/{right}")]
    IncompatibleExponent { left: u32, right: u32 },

    #[error("capacity exceeded for {what}: requested {requested}, limit {limit}")]
    Capacity {
        what: &'static str,
        requested: usize,
        limit: usize,
    },

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("canonical recursion cannot proceed: P_r is singular at rank r = {rank}")]
    SingularStep { rank: usize },

    #[error("tau system of size {size} is singular (N = {degree})")]
    IllPosedTau { size: usize, degree: usize },

    #[error("canonical table ordering: {0}")]
    Ordering(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
