//! Walk counting, spectral radii of strongly connected subdigraphs, the
//! growth exponent, Perron certificates, witness families and the
//! 𝒲_k diagnostic.

use thiserror::Error;

pub mod checks;
pub mod exponent;
pub mod matrix;
pub mod poly;
pub mod perron;
pub mod roots;
pub mod witness;

pub use exponent::{growth_exponent, SpectralReport};
pub use matrix::{count_walks, strongly_connected_subdigraph, CountMatrix, StronglyConnectedSubdigraph};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpectralError {
    #[error("walk length {n} exceeds budget {budget}")]
    BudgetExceeded { n: usize, budget: usize },
    #[error("sequence is sparse; the growth exponent is undefined")]
    Sparse,
    #[error("spectral radius is not above 1")]
    RadiusNotAboveOne,
    #[error("state {0} is not tied")]
    NotTied(String),
    #[error("state {0} listed twice")]
    RepeatedState(String),
    #[error("bound violated at n = {n}: {detail}")]
    BoundViolation { n: usize, detail: String },
}
