//! Numerical realizations of the Knizhnik–Zamolodchikov and dynamical operator
//! families on tensor-product weight spaces of `gl_k` modules, together with
//! the `(gl_k, gl_n)` duality frame and a sampling-based identity verifier.
//!
//! The crate is organized around a single concrete arena: the lattice of
//! nonnegative integer `k × n` matrices with prescribed row sums `m` and
//! column sums `l`, which indexes a divided-power monomial basis of the
//! weight subspace `(V_{l_1} ⊗ … ⊗ V_{l_n})[m]`. Every operator family
//! (rational/trigonometric KZ and dynamical operators, `B`-series, Yangian
//! R-matrices, qKZ/qDD shift factors) is realized as a dense complex matrix
//! on such a space, evaluated at explicit parameter points.

pub mod duality;
pub mod glk;
pub mod linalg;
pub mod ops;
pub mod verify;

pub use glk::{enumerate_basis, HwModule, TensorWeightSpace};
pub use linalg::{C64, CMat};

/// Errors shared across all modules of the crate.
#[derive(Debug, thiserror::Error)]
pub enum CoreError {
    #[error("weight sums differ: sum(l) = {0}, sum(m) = {1}")]
    WeightSumMismatch(C64, C64),
    #[error("{name} must be a nonnegative integer, got {value}")]
    NonIntegerWeight { name: String, value: C64 },
    #[error("index out of range: {0}")]
    IndexRange(String),
    #[error("singular point: {0}")]
    SingularPoint(String),
    #[error("linear solve failed: {0}")]
    LinearSolve(String),
    #[error("R-matrix system degenerate on block {block} at t = {t}: {detail}")]
    RBlockSingular { block: String, t: C64, detail: String },
    #[error("operator series does not truncate: {0}")]
    NonTruncating(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
