use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure mode of the library.
///
/// Variants are grouped roughly by the layer that raises them; callers that
/// only need a coarse classification can use [`Error::kind`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    // p-adic layer
    #[error("precision loss: {0}")]
    PrecisionLoss(String),
    #[error("zero input: {0}")]
    ZeroInput(String),
    #[error("elements belong to different local fields")]
    FieldMismatch,
    #[error("invalid valuation target {0}")]
    InvalidValuation(String),
    #[error("invalid field description: {0}")]
    InvalidField(String),

    // coefficient algebras
    #[error("level mismatch: expected {expected}, found {found}")]
    LevelMismatch {
        expected: &'static str,
        found: &'static str,
    },
    #[error("dual numbers over different base rings")]
    BaseMismatch,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    // (phi,N)-modules and filtrations
    #[error("relation N*phi = p*phi*N violated at slot {slot}")]
    RelationViolation { slot: usize },
    #[error("phi is not invertible at slot {slot}")]
    NonInvertiblePhi { slot: usize },
    #[error("N is not nilpotent at slot {slot}")]
    NonNilpotent { slot: usize },
    #[error("invalid filtration: {0}")]
    InvalidFiltration(String),
    #[error("unsupported enumeration: {0}")]
    UnsupportedEnumeration(String),

    // monodromy constructors
    #[error("constraint violation: {0}")]
    ConstraintViolation(String),
    #[error("the L-invariant must be nonzero")]
    ZeroEll,
    #[error("not of monodromy type: {0}")]
    NotMonodromyType(String),

    // cohomology / differential forms
    #[error("frobenius is not unipotent: {0}")]
    NotUnipotent(String),
    #[error("direction is singular: trace(direction * dkappa) is not a unit")]
    SingularDirection,

    // serialization
    #[error("parse error at {pointer}: {message}")]
    Parse { pointer: String, message: String },
}

/// Coarse classification used for exit codes and reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Precision,
    Input,
    Structure,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::PrecisionLoss(_) => ErrorKind::Precision,
            Error::Parse { .. } | Error::InvalidField(_) => ErrorKind::Input,
            _ => ErrorKind::Structure,
        }
    }

    pub(crate) fn parse(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            pointer: pointer.into(),
            message: message.into(),
        }
    }
}
