//! Parametric operator families on tensor weight spaces.

pub mod bseries;
pub mod kzdd;
pub mod qdd;
pub mod qkz;
pub mod rmatrix;

mod param;

pub use param::{OpKind, ParamPoint, ParametricOperator, Var};
