use thiserror::Error;

/// Errors raised by nodalkit operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum NodalError {
    #[error("matrix is not symmetric at ({i}, {j}): {a} vs {b}")]
    NotSymmetric { i: usize, j: usize, a: f64, b: f64 },

    #[error("matrix contains a non-finite entry at ({i}, {j})")]
    NonFinite { i: usize, j: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("graph has {components} connected components; operation requires an irreducible matrix")]
    Reducible { components: usize },

    #[error("vector vanishes at {count} analyzed vertices (first: {first})")]
    Vanishing { count: usize, first: usize },

    #[error("instance size {n} exceeds the exact-search cap {cap}; use the heuristic")]
    ExceedsCap { n: usize, cap: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("construction failed: {0}")]
    Construction(String),
}

pub type Result<T> = std::result::Result<T, NodalError>;
