//! Asymptotic performance analysis of the LASSO under correlated Gaussian
//! designs, paired with a Monte Carlo simulation harness.
//!
//! The theory side solves a scalar min-max problem over `(alpha, beta, chi)`
//! whose solution yields exact high-dimensional predictions of the LASSO's
//! mean squared error, support recovery probabilities, element error rate and
//! cosine similarity. The empirical side generates correlated-design
//! instances, solves the LASSO numerically and aggregates the same metrics
//! across seeded trials, so the two can be compared point by point along a
//! regularizer sweep.

pub mod cgmt;
pub mod config;
pub mod correlation;
pub mod harness;
pub mod kernels;
pub mod lasso;
pub mod prior;
pub mod report;
pub mod theory;

mod error;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
