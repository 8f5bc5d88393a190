use thiserror::Error;

use crate::frobenius::TraceReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),

    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),

    #[error("division by exact zero")]
    DivisionByZero,

    #[error("variable mismatch: `{0}` vs `{1}`")]
    VariableMismatch(String, String),

    #[error("series has a constant term and cannot be exponentiated")]
    NotExponentiable,

    #[error("unsupported Lubin-Tate tower: {0}")]
    UnsupportedTower(String),

    #[error("bad characteristic: {0}")]
    BadCharacteristic(String),

    #[error("element is not stable: {0}")]
    NotStable(String),

    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("unknown root system type `{0}`")]
    UnknownType(String),

    #[error("unsupported connection: {0}")]
    UnsupportedConnection(String),

    #[error("module is not solvable: {0}")]
    NotSolvable(String),

    #[error("trace did not stabilise: {} stable digits, {} required", .0.stable_digits, .0.required)]
    ConvergenceShortfall(Box<TraceReport>),

    #[error("linear system of size {rows}x{cols} exceeds the cap {cap}")]
    TooLarge { rows: usize, cols: usize, cap: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
