use thiserror::Error;

/// Errors produced anywhere in the core library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("system layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("expected a unit vector, got norm {0}")]
    NotUnitVector(f64),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),

    #[error("variable `{name}` has cardinality {card}, value {value} is out of range")]
    ValueOutOfRange { name: String, card: usize, value: usize },

    #[error("variable sets overlap on `{0}`")]
    OverlappingSets(String),

    #[error("conditioning event has mass {0:e}, too small to condition on")]
    ZeroMassCondition(f64),

    #[error("parity events need binary variables, `{0}` is not binary")]
    NonBinaryParity(String),

    #[error("base table support has {0} cells, refusing to enumerate more than 20")]
    SupportTooLarge(usize),

    #[error("invalid setting count N = {0}: {1}")]
    InvalidN(usize, &'static str),

    #[error("setting index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("malformed table: {0}")]
    MalformedTable(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
