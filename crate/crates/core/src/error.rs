use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("correlation matrix is not symmetric: max |S[i,j] - S[j,i]| = {max_asym:e}")]
    AsymmetricMatrix { max_asym: f64 },

    #[error("correlation matrix is not positive semidefinite: eigenvalue {eigenvalue:e} below tolerance")]
    NotPositiveSemidefinite { eigenvalue: f64 },

    #[error(
        "mu fixed point did not converge after {iterations} iterations (residual {residual:e})"
    )]
    MuNonConvergence { iterations: usize, residual: f64 },

    #[error("saddle search did not converge: {0}")]
    SaddleNonConvergence(String),

    #[error("saddle point used before convergence")]
    UnconvergedSaddle,

    #[error("consistency check failed: {0}")]
    ConsistencyFailure(String),

    #[error("cosine similarity undefined: {0}")]
    CosineUndefined(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
