use thiserror::Error;

/// Errors surfaced by the library. Anything that reaches a user decision
/// (bad input, failed precondition, failed verification) gets its own
/// variant; `Internal` marks broken invariants and should never fire.
#[derive(Debug, Error)]
pub enum QdeError {
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("mixed base fields: {0}")]
    MixedFields(String),

    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    #[error("relation ideal is not admissible within length cap {cap}")]
    NotAdmissible { cap: usize },

    #[error("bad relation: {0}")]
    BadRelation(String),

    #[error("characteristic {p} too small for this operation on dimension {dim}")]
    SmallCharacteristic { p: u32, dim: usize },

    #[error("semisimple quotient has a block that does not split over the base field: {0}")]
    NotSplit(String),

    #[error("algebra is not basic: {0}")]
    NotBasic(String),

    #[error("assignment does not kill relation: {0}")]
    RelationNotKilled(String),

    #[error("differentials do not square to zero: {0}")]
    NotAComplex(String),

    #[error("entry outside its idempotent block: {0}")]
    BlockMismatch(String),

    #[error("objects defined over different algebras: {0}")]
    AlgebraMismatch(String),

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    #[error("verification failed: {0}")]
    VerificationFailed(String),

    #[error("search budget exhausted: {0}")]
    BudgetExhausted(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, QdeError>;
