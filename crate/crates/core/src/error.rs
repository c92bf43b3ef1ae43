use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid subset: {0}")]
    InvalidSubset(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("grade {grade} exceeds ambient dimension {m}")]
    GradeOverflow { grade: usize, m: usize },
    #[error("operation requires grade {expected}, got {found}")]
    WrongGrade { expected: String, found: usize },
    #[error("degenerate grade n={n} in dimension m={m}: length is trivially 1")]
    DegenerateGrade { m: usize, n: usize },
    #[error("basis index {index} out of range 1..={m}")]
    IndexOutOfRange { index: usize, m: usize },
    #[error("zero multivector")]
    ZeroMultivector,
    #[error("factor vectors are linearly dependent")]
    DependentFactors,
    #[error("skew-symmetric matrix has odd numeric rank {0}; tolerance is too tight or too loose")]
    OddSkewRank(usize),
    #[error("field tag R requires zero imaginary parts")]
    NotReal,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("size cap exceeded: {0}")]
    TooLarge(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("duplicate index set {0:?}")]
    DuplicateIndex(Vec<usize>),
    #[error("numerical failure: {0}")]
    Numerical(String),
}
