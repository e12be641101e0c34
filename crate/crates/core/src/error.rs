use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("elements of Q(sqrt {0}) and Q(sqrt {1}) cannot be combined")]
    FieldMismatch(i64, i64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("{0} is not a squarefree integer different from 0 and 1")]
    BadDiscriminant(i64),
    #[error("insufficient precision: {0}")]
    Precision(String),
    #[error("missing coefficient a_{0}")]
    MissingCoefficient(u64),
    #[error("character: {0}")]
    Character(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("bad reduction at p = {0}")]
    BadReduction(u64),
    #[error("line {line}, column {column}: {msg}")]
    Parse { line: usize, column: usize, msg: String },
    #[error("{label}: {msg}")]
    Validation { label: String, msg: String },
    #[error("coefficient source unreachable: {0}")]
    SourceUnreachable(String),
    #[error("level {0} not available from the coefficient source")]
    NotFound(u64),
    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
