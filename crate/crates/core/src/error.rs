use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("argument outside the domain of {what}: {detail}")]
    Domain { what: &'static str, detail: String },

    #[error("{what} did not reach tail tolerance {tol:e} within {terms} terms")]
    NonConvergence {
        what: &'static str,
        terms: usize,
        tol: f64,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error(
        "truncation N = {n} is too small for degree {degree} at q = {q} and tolerance {tol:e} (need N >= {required})"
    )]
    TruncationPolicy {
        n: usize,
        degree: usize,
        q: f64,
        tol: f64,
        required: usize,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
