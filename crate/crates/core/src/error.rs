use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("degree {degree} outside window [{lo}, {hi}]")]
    OutOfWindow { degree: i32, lo: i32, hi: i32 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("not a chain complex: {0}")]
    NotComplex(String),
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("tree syntax error at byte {pos}: {msg}")]
    TreeSyntax { pos: usize, msg: String },
    #[error("color mismatch: {0}")]
    Color(String),
    #[error("missing structure: {0}")]
    Missing(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
