//! Hypergeometric and q-hypergeometric integral machinery: master and weight
//! functions, nested loop and Mellin-Barnes contours with continuous branch
//! tracking, Selberg closed forms, Gauss 2F1 evaluations, and the duality
//! identity checks between integrals of different dimensions.

pub mod asymptotic;
pub mod contour;
pub mod dualints;
pub mod gamma;
pub mod gauss2f1;
pub mod master;
pub mod quad;
pub mod selberg;
pub mod solution;
pub mod weights;

pub use kzdual_core::linalg::{C64, CMat};

/// Errors specific to the integral layer.
#[derive(Debug, thiserror::Error)]
pub enum HyperError {
    #[error("parameter region violated: {0}")]
    Region(String),
    #[error("quadrature did not converge: {0}")]
    NonConvergent(String),
    #[error("branch tracking failed: {0}")]
    Branch(String),
    #[error("singular integrand: {0}")]
    Singular(String),
    #[error(transparent)]
    Core(#[from] kzdual_core::CoreError),
}

pub type Result<T> = std::result::Result<T, HyperError>;
