use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid local dimension {0}, need d >= 2")]
    InvalidDimension(usize),

    #[error("invalid multi-index: {0}")]
    InvalidIndex(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("coefficient {index} has imaginary residue {residue:e} above tolerance")]
    NumericalConsistency { index: String, residue: f64 },

    #[error("reduction to the empty party set is a scalar and is not returned")]
    EmptyReduction,

    #[error("invalid bipartite cut {0}: need a proper nonempty subset")]
    InvalidCut(String),

    #[error("party {party} out of range for {n} parties")]
    PartyOutOfRange { party: usize, n: usize },

    #[error("duplicate measurement of {0}")]
    DuplicateMeasurement(String),

    #[error("malformed contraction pattern: {0}")]
    Pattern(String),

    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
