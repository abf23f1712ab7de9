use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("invalid weight {value} at position {index}: weights must be strictly positive and finite")]
    InvalidWeight { index: usize, value: f64 },

    #[error("empty measure space")]
    EmptySpace,

    #[error("invalid lattice index ({inv_p}, {inv_q}): coordinates must lie in [0, 1]")]
    InvalidIndex { inv_p: f64, inv_q: f64 },

    #[error("invalid exponent {0}: must lie in [1, inf]")]
    InvalidExponent(f64),

    #[error("scale index {k} outside the configured range [-{max}, {max}]")]
    ScaleOutOfRange { k: i32, max: i32 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("optimizer did not converge within {iterations} iterations (best bound {best})")]
    NotConverged { best: f64, iterations: usize },

    #[error("resolution operator is not invertible (smallest singular value {sigma_min:e}, tolerance {tolerance:e})")]
    NotInvertible { sigma_min: f64, tolerance: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("product undefined: i(A) = {iset:?} and d(B) = {dset:?} do not intersect")]
    UndefinedProduct { iset: Vec<String>, dset: Vec<String> },

    #[error("singular kernel matrix (smallest eigenvalue {0:e})")]
    SingularKernel(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
