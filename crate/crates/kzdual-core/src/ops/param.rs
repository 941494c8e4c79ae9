//! Parameter points and the generic parametric-operator wrapper.

use std::sync::Arc;

use serde_json::json;

use crate::linalg::{complex_to_json, mat_to_json, C64, CMat};
use crate::Result;

/// A point `(z, λ, κ)` in parameter space.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamPoint {
    pub z: Vec<C64>,
    pub lambda: Vec<C64>,
    pub kappa: C64,
}

impl ParamPoint {
    pub fn new(z: Vec<C64>, lambda: Vec<C64>, kappa: C64) -> Self {
        ParamPoint { z, lambda, kappa }
    }

    /// The point with `z_i` (1-based) shifted by `κ`.
    pub fn shift_z(&self, i: usize) -> Self {
        let mut p = self.clone();
        p.z[i - 1] += self.kappa;
        p
    }

    /// The point with `λ_a` (1-based) shifted by `κ`.
    pub fn shift_lambda(&self, a: usize) -> Self {
        let mut p = self.clone();
        p.lambda[a - 1] += self.kappa;
        p
    }

    /// The point with the roles of `z` and `λ` swapped (duality side change).
    pub fn swapped(&self) -> Self {
        ParamPoint {
            z: self.lambda.clone(),
            lambda: self.z.clone(),
            kappa: self.kappa,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "z": self.z.iter().map(|&v| complex_to_json(v)).collect::<Vec<_>>(),
            "lambda": self.lambda.iter().map(|&v| complex_to_json(v)).collect::<Vec<_>>(),
            "kappa": complex_to_json(self.kappa),
        })
    }
}

/// A differentiation / shift variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    Z(usize),
    Lambda(usize),
}

/// What the evaluated matrix represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpKind {
    /// The operator is `κ ∂_v − A(point)` (or `κ v ∂_v − A` in the
    /// trigonometric case); `eval` returns `A`.
    DiffCoeff { var: Var, trig: bool },
    /// The operator is `A(point) · T_v` with `T_v` the shift `v ↦ v + κ`;
    /// `eval` returns `A`.
    ShiftFactor { var: Var },
}

type EvalFn = Arc<dyn Fn(&ParamPoint) -> Result<CMat> + Send + Sync>;
type PartialFn = Arc<dyn Fn(&ParamPoint, Var) -> Option<Result<CMat>> + Send + Sync>;

/// A map from parameter points to dense complex matrices, tagged with the
/// differential/shift structure of the operator it represents. Evaluation is
/// pure and deterministic.
#[derive(Clone)]
pub struct ParametricOperator {
    pub kind: OpKind,
    pub dim: usize,
    eval_fn: EvalFn,
    partial_fn: Option<PartialFn>,
}

impl ParametricOperator {
    pub fn new(kind: OpKind, dim: usize, eval_fn: EvalFn, partial_fn: Option<PartialFn>) -> Self {
        ParametricOperator {
            kind,
            dim,
            eval_fn,
            partial_fn,
        }
    }

    pub fn eval(&self, p: &ParamPoint) -> Result<CMat> {
        (self.eval_fn)(p)
    }

    /// Analytic partial derivative of the coefficient matrix with respect to
    /// `var`, falling back to Richardson-extrapolated central differences.
    pub fn partial(&self, p: &ParamPoint, var: Var) -> Result<CMat> {
        if let Some(pf) = &self.partial_fn {
            if let Some(res) = pf(p, var) {
                return res;
            }
        }
        self.fd_partial(p, var)
    }

    /// Central finite difference with one Richardson extrapolation step,
    /// step `h = 1e-5 · scale`.
    pub fn fd_partial(&self, p: &ParamPoint, var: Var) -> Result<CMat> {
        let base = match var {
            Var::Z(i) => p.z[i - 1],
            Var::Lambda(a) => p.lambda[a - 1],
        };
        let scale = base.norm().max(1.0);
        let h = 1e-5 * scale;
        let eval_at = |delta: f64| -> Result<CMat> {
            let mut q = p.clone();
            match var {
                Var::Z(i) => q.z[i - 1] += crate::linalg::cr(delta),
                Var::Lambda(a) => q.lambda[a - 1] += crate::linalg::cr(delta),
            }
            self.eval(&q)
        };
        let d_h = (eval_at(h)? - eval_at(-h)?) / crate::linalg::cr(2.0 * h);
        let d_h2 = (eval_at(h / 2.0)? - eval_at(-h / 2.0)?) / crate::linalg::cr(h);
        Ok(&d_h2 * crate::linalg::cr(4.0 / 3.0) - &d_h * crate::linalg::cr(1.0 / 3.0))
    }

    /// Export `{point, matrix}` JSON per the wire format used by golden tests.
    pub fn export_json(&self, p: &ParamPoint) -> Result<serde_json::Value> {
        let m = self.eval(p)?;
        Ok(json!({ "point": p.to_json(), "matrix": mat_to_json(&m) }))
    }
}
