use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("coherence order {0} out of range")]
    CoherenceOrder(i32),

    #[error("unsupported spin 2I = {0}")]
    UnsupportedSpin(u32),

    #[error("degenerate spectrum for q = {q}: {detail}; use the numeric eigensystem")]
    DegenerateSpectrum { q: usize, detail: String },

    #[error("defective matrix (condition number {condition:.3e})")]
    Defective { condition: f64 },

    #[error("complex eigenvalue {re} + {im}i in a relaxation block")]
    ComplexEigenvalue { re: f64, im: f64 },

    #[error("non-finite objective at evaluation {evaluation}")]
    NonFinite { evaluation: usize, best_x: Vec<f64>, best_f: f64 },

    #[error("fit did not converge: {0}")]
    NotConverged(String),

    #[error("fixture parse error at line {line}: {msg}")]
    Fixture { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
