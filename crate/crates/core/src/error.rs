use thiserror::Error;

pub type Result<T, E = EtfError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EtfError {
    #[error("invalid frame parameters d = {d}, n = {n}: {reason}")]
    InvalidParameters { d: usize, n: usize, reason: String },

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("d = {d} does not match n·sin²(θ/2) = {implied} for the signature")]
    ThetaMismatch { d: usize, implied: f64 },

    #[error("not an ETF Gram matrix: {}", .0.join("; "))]
    InvalidGram(Vec<String>),

    #[error("not a signature unitary: {}", .0.join("; "))]
    InvalidSignature(Vec<String>),

    #[error("not a tight unit-norm synthesis matrix: {}", .0.join("; "))]
    InvalidSynthesis(Vec<String>),

    #[error("numerical rank {found} differs from expected {expected}")]
    RankMismatch { expected: usize, found: usize },

    #[error("column {column} is not unit norm (deviation {deviation:e})")]
    NotNormalized { column: usize, deviation: f64 },

    #[error("rank-deficient seed: pivot norm {pivot_norm:e} at column {column}")]
    RankDeficientSeed { column: usize, pivot_norm: f64 },

    #[error("odd tensor power {0} has no constant-diagonal form")]
    OddPower(u32),

    #[error("{0} is not a perfect square")]
    NotASquare(u64),

    #[error("zero entry at ({row}, {col})")]
    ZeroEntry { row: usize, col: usize },

    #[error("entry ({row}, {col}) is not unimodular after scaling (modulus {modulus})")]
    NotUnimodular { row: usize, col: usize, modulus: f64 },

    #[error("columns {i} and {j} are not an ER pair (max imaginary part {deviation:e})")]
    NotErPair { i: usize, j: usize, deviation: f64 },

    #[error("family evaluation failed at parameters {params:?}: {reason}")]
    FamilyEvaluation { params: Vec<f64>, reason: String },

    #[error("optimizer failure: {0}")]
    Optimizer(String),

    #[error("integer overflow in exact arithmetic")]
    Overflow,

    #[error("parse error: {0}")]
    Parse(String),
}
