use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid symmetry: {0}")]
    InvalidSymmetry(String),

    #[error("point sets have different sizes ({0} vs {1})")]
    SizeMismatch(usize, usize),

    #[error("argument {value} outside the kernel domain [0, 1]")]
    Domain { value: f64 },

    #[error("negative squared worst-case error {0:e}")]
    Inconsistent(f64),

    #[error("generator {g} is not coprime to N = {n}")]
    InvalidGenerator { n: usize, g: usize },

    #[error("invalid Fibonacci index {0} (need at least 2)")]
    InvalidFibonacciIndex(usize),

    #[error("{0} is not a Fibonacci number")]
    NotFibonacci(usize),

    #[error("point set has coinciding {axis} coordinates; its cell is ambiguous")]
    AmbiguousCell { axis: char },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("index out of range: {0}")]
    OutOfRange(String),

    #[error("N = {n} is too large for {what} (limit {limit})")]
    TooLarge { what: &'static str, n: usize, limit: usize },

    #[error("gamma = {0} lies outside the convexity range [0, 6]")]
    GammaOutOfRange(String),

    #[error("sign of the difference is undefined (coordinates {0} and {1} coincide)")]
    SignUndefined(usize, usize),

    #[error("block Hessian is not positive definite")]
    NotPositiveDefinite,

    #[error("iterate left the cell at iteration {iteration}")]
    CellExit { iteration: usize },

    #[error("dual point violates feasibility: {0}")]
    DualInfeasible(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("record failed validation: {0}")]
    Validation(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
