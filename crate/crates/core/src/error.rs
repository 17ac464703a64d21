use thiserror::Error;

/// Errors produced by the core library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("degree mismatch: expected {expected}, got {got}")]
    DegreeMismatch { expected: usize, got: usize },

    #[error("polynomial has odd degree {0}; an even degree is required here")]
    OddDegree(usize),

    #[error("polynomial has even degree {0}; an odd degree is required here")]
    EvenDegree(usize),

    #[error("polynomial mixes odd- and even-degree monomials")]
    MixedParity,

    #[error("monomial of degree {degree} exceeds the target degree {target}")]
    DegreeTooHigh { degree: usize, target: usize },

    #[error("integer overflow while computing {0}")]
    Overflow(&'static str),

    #[error("dense oracle size {size} exceeds the cap {cap}")]
    SizeGuard { size: usize, cap: usize },

    #[error("relaxation dimension p = {p} exceeds the resource cap {cap}")]
    ResourceGuard { p: usize, cap: usize },

    #[error("the zero polynomial is not a valid objective")]
    ZeroPolynomial,

    #[error("invalid level {level}: must be at least {min}")]
    InvalidLevel { level: usize, min: usize },

    #[error("cannot trace out {traced} of {copies} copies")]
    InvalidPartialTrace { traced: usize, copies: usize },

    #[error("matrix is not a state: min eigenvalue {min_eig:e}, trace {trace}")]
    NotAState { min_eig: f64, trace: f64 },

    #[error("solver tolerance {0:e} outside [1e-10, 1e-2]")]
    InvalidTolerance(f64),

    #[error("solution is not optimal (status {0})")]
    NotOptimal(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
