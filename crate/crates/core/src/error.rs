use thiserror::Error;

/// Errors raised by symbol, matrix and solver operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("ill conditioned problem: cond = {cond:e}")]
    IllConditioned { cond: f64 },

    #[error("symbol vanishes on the unit circle")]
    ZeroOnCircle,

    #[error("grid size {n} is not a power of two greater than the symbol degree {degree}")]
    BadGridSize { n: usize, degree: usize },

    #[error("grid values are not symmetric: asymmetry {residual:e}")]
    AsymmetryDetected { residual: f64 },

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("non-finite value produced while evaluating {0}")]
    DomainFault(String),

    #[error("alpha = {0} is not one of -1, 0, 1")]
    BadAlpha(f64),

    #[error("binomial coefficients overflow for n = {0}")]
    BinomialOverflow(usize),

    #[error("operands are stored in different representation modes")]
    ModeMismatch,

    #[error("operands use different alpha values ({0} vs {1})")]
    AlphaMismatch(f64, f64),

    #[error("small SWM block is singular to working precision")]
    SingularSmallBlock,

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("not implemented: {0}")]
    NotImplemented(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl Error {
    /// True for the two outcomes of the ill-conditioned branch of symbol inversion
    /// (a finite but huge condition number, or an exact zero on the circle).
    pub fn is_ill_conditioned(&self) -> bool {
        matches!(self, Error::IllConditioned { .. } | Error::ZeroOnCircle)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
