use thiserror::Error;

/// Errors produced by the determinant engine and its building blocks.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("malformed matrix header: {0}")]
    MalformedHeader(String),

    #[error("wrong entry count: expected {expected}, found {found}")]
    WrongEntryCount { expected: usize, found: usize },

    #[error("invalid integer token {token:?} at line {line}")]
    InvalidToken { token: String, line: usize },

    #[error("matrix must be square and non-empty (got {rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("prime {0} already present in the accumulator")]
    DuplicatePrime(u64),

    #[error("matrix is singular modulo {0}")]
    SingularModP(u64),

    #[error("rational reconstruction has no solution within the bounds")]
    NoSolution,

    #[error("rational reconstruction failed: {0}")]
    ReconstructionFailure(String),

    #[error("exact division failed at row {row}, column {col}")]
    NotDivisible { row: usize, col: usize },

    #[error("matrix is probably singular")]
    ProbablySingular,

    #[error("iteration limit of {0} reached")]
    IterationLimit(usize),

    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),

    #[error("matrix generation failed: {0}")]
    GenerationFailed(String),

    #[error("invalid engine configuration: {0}")]
    InvalidConfig(String),

    #[error("internal bound violated: {0}")]
    BoundViolation(String),

    #[error("strategies disagree on the determinant for n = {0}")]
    Disagreement(usize),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
