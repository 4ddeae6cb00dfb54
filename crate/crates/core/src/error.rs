use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("point {x} lies outside the domain")]
    OutOfDomain { x: f64 },
    #[error("derivative order {requested} exceeds jet cap {cap}")]
    JetCapExceeded { requested: usize, cap: usize },
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("invalid radius {0}")]
    InvalidRadius(f64),
    #[error("empty cover")]
    EmptyCover,
    #[error("cover leaves {x} uncovered")]
    GapInCover { x: f64 },
    #[error("invalid cover: {0}")]
    InvalidCover(String),
    #[error("quadrature did not converge: estimate {estimate}, error bound {error}")]
    NoConvergence { estimate: f64, error: f64 },
    #[error("distribution has no compact support and no cutoff was supplied")]
    UnboundedSupport,
    #[error("moment system is singular (condition estimate {condition:e})")]
    SingularMomentSystem { condition: f64 },
    #[error("cover too coarse: {0}")]
    CoverTooCoarse(String),
    #[error("{0} is not contained in {1}")]
    NotContained(String, String),
    #[error("pieces disagree on an overlap near {x}")]
    IncompatiblePieces { x: f64 },
    #[error("bad nesting: {0}")]
    BadNesting(String),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("element is not local")]
    NotLocal,
    #[error("wrong locality tag: {0}")]
    WrongTag(String),
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("sup norms at the base point are not strictly increasing near k = {k}")]
    NoSeparation { k: usize },
    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("config error for key `{key}`: {msg}")]
    Config { key: String, msg: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
