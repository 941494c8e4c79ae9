//! The qDD shift factors
//!
//! ```text
//! X_a(z; λ) = ( B_ak(λ_ak) ⋯ B_{a,a+1}(λ_{a,a+1}) )⁻¹
//!             × ∏_i (z_i^{−e_aa})^{(i)} · B_{1a}(λ_{1a}−κ) ⋯ B_{a−1,a}(λ_{a−1,a}−κ)
//! ```
//!
//! with `λ_bc = λ_b − λ_c`. The qDD operator is `Q_{λ_a} = X_a T_{λ_a}` where
//! `T` shifts `λ_a` by `κ`. Non-integer powers are entrywise principal powers
//! (`arg ∈ (−π, π]`); `(e_aa)^{(i)}` is diagonal in the monomial basis.

use std::sync::Arc;

use crate::glk::TensorWeightSpace;
use crate::linalg::{solve_square, zeros, C64, CMat};
use crate::ops::bseries::b_series;
use crate::ops::kzdd::check_nonzero;
use crate::ops::{OpKind, ParamPoint, ParametricOperator, Var};
use crate::{CoreError, Result};

/// Diagonal of `∏_i (z_i^{−e_aa})^{(i)}`.
fn z_power_diag(space: &TensorWeightSpace, a: usize, z: &[C64]) -> CMat {
    let dim = space.dim();
    let mut d = zeros(dim, dim);
    for idx in 0..dim {
        let mut v = C64::new(1.0, 0.0);
        for i in 1..=space.n {
            v *= z[i - 1].powc(-space.entry(idx, a, i));
        }
        d[(idx, idx)] = v;
    }
    d
}

/// The three factors of `X_a` at a point: inverse chain, diagonal, direct chain.
fn x_a_parts(
    space: &TensorWeightSpace,
    a: usize,
    p: &ParamPoint,
) -> Result<(CMat, CMat, CMat)> {
    check_nonzero(&p.z, "z")?;
    let k = space.k;
    let dim = space.dim();
    // The printed product B_ak ⋯ B_{a,a+1} runs over descending c.
    let mut pre = crate::linalg::eye(dim);
    for c_ in ((a + 1)..=k).rev() {
        pre = pre * b_series(space, a, c_, p.lambda[a - 1] - p.lambda[c_ - 1])?;
    }
    let diag = z_power_diag(space, a, &p.z);
    let mut post = crate::linalg::eye(dim);
    for c_ in 1..a {
        post = post * b_series(space, c_, a, p.lambda[c_ - 1] - p.lambda[a - 1] - p.kappa)?;
    }
    Ok((pre, diag, post))
}

/// Matrix of `X_a(z; λ)`.
pub fn x_a_matrix(space: &TensorWeightSpace, a: usize, p: &ParamPoint) -> Result<CMat> {
    let (pre, diag, post) = x_a_parts(space, a, p)?;
    solve_square(&pre, &(diag * post))
}

/// `X_a` as a parametric shift-factor operator with analytic `∂/∂z_i`.
pub fn qdd_factor(space: &TensorWeightSpace, a: usize) -> Result<ParametricOperator> {
    if a < 1 || a > space.k {
        return Err(CoreError::IndexRange(format!("Cartan index {a}")));
    }
    let dim = space.dim();
    let sp = Arc::new(space.clone());
    let eval = {
        let sp = sp.clone();
        move |p: &ParamPoint| x_a_matrix(&sp, a, p)
    };
    let partial = {
        let sp = sp.clone();
        move |p: &ParamPoint, var: Var| -> Option<Result<CMat>> {
            let Var::Z(i) = var else { return None };
            let res = (|| -> Result<CMat> {
                let (pre, diag, post) = x_a_parts(&sp, a, p)?;
                // ∂/∂z_i inserts the diagonal −e_aa^{(i)}/z_i.
                let mut d = diag;
                for idx in 0..sp.dim() {
                    d[(idx, idx)] *= -sp.entry(idx, a, i) / p.z[i - 1];
                }
                solve_square(&pre, &(d * post))
            })();
            Some(res)
        }
    };
    Ok(ParametricOperator::new(
        OpKind::ShiftFactor { var: Var::Lambda(a) },
        dim,
        Arc::new(eval),
        Some(Arc::new(partial)),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::glk::{enumerate_basis, reals};
    use crate::linalg::{c, cr, eye, rel_residual};
    use crate::ops::kzdd::{kz_coeff, Flavor};

    fn point(z: &[(f64, f64)], l: &[(f64, f64)], kappa: (f64, f64)) -> ParamPoint {
        ParamPoint::new(
            z.iter().map(|&(re, im)| c(re, im)).collect(),
            l.iter().map(|&(re, im)| c(re, im)).collect(),
            c(kappa.0, kappa.1),
        )
    }

    #[test]
    fn rank_one_is_pure_power() {
        // k = 1: X_1 = ∏ z_i^{−l_i} · Id.
        let space = enumerate_basis(1, 2, &reals(&[3.0, 2.0]), &reals(&[5.0])).unwrap();
        let p = point(&[(0.8, 0.3), (-0.7, 0.4)], &[(1.0, 0.0)], (2.0, 0.0));
        let x = x_a_matrix(&space, 1, &p).unwrap();
        let expect = p.z[0].powc(cr(-3.0)) * p.z[1].powc(cr(-2.0));
        assert!((x[(0, 0)] - expect).norm() < 1e-14);
    }

    #[test]
    fn k2_structure() {
        // a = 1: X_1 = B_12(λ_12)⁻¹ ∏ (z_i^{−e_11})^{(i)};
        // a = k: X_2 = ∏ (z_i^{−e_22})^{(i)} B_12(λ_12 − κ).
        let space = enumerate_basis(2, 2, &reals(&[2.0, 1.0]), &reals(&[2.0, 1.0])).unwrap();
        let p = point(
            &[(0.9, 0.2), (-0.6, 0.5)],
            &[(1.4, 0.1), (-0.8, 0.3)],
            (1.9, 0.4),
        );
        let x1 = x_a_matrix(&space, 1, &p).unwrap();
        let b12 = b_series(&space, 1, 2, p.lambda[0] - p.lambda[1]).unwrap();
        let d1 = z_power_diag(&space, 1, &p.z);
        assert!(rel_residual(&(b12 * &x1), &d1) < 1e-12);

        let x2 = x_a_matrix(&space, 2, &p).unwrap();
        let b12s = b_series(&space, 1, 2, p.lambda[0] - p.lambda[1] - p.kappa).unwrap();
        let d2 = z_power_diag(&space, 2, &p.z);
        assert!(rel_residual(&x2, &(d2 * b12s)) < 1e-12);
    }

    #[test]
    fn analytic_z_partial_matches_fd() {
        let space = enumerate_basis(2, 2, &reals(&[1.0, 1.0]), &reals(&[1.0, 1.0])).unwrap();
        let op = qdd_factor(&space, 1).unwrap();
        let p = point(
            &[(0.9, 0.2), (-0.6, 0.5)],
            &[(1.4, 0.1), (-0.8, 0.3)],
            (1.9, 0.4),
        );
        for i in 1..=2 {
            let an = op.partial(&p, Var::Z(i)).unwrap();
            let fd = op.fd_partial(&p, Var::Z(i)).unwrap();
            assert!(rel_residual(&an, &fd) < 1e-8);
        }
    }

    #[test]
    fn qdd_braid_identity() {
        // X_a(z;λ) X_b(z;λ+κδ_a) = X_b(z;λ) X_a(z;λ+κδ_b).
        for (k, n, l, m) in [
            (2usize, 2usize, vec![1.0, 1.0], vec![1.0, 1.0]),
            (3, 2, vec![2.0, 1.0], vec![1.0, 1.0, 1.0]),
        ] {
            let space = enumerate_basis(k, n, &reals(&l), &reals(&m)).unwrap();
            let lambdas = [(1.5, 0.2), (-0.9, 0.35), (0.3, -1.1)];
            let p = point(&[(0.85, 0.25), (-0.65, 0.45)], &lambdas[..k], (1.8, 0.5));
            for a in 1..=k {
                for b in 1..=k {
                    if a == b {
                        continue;
                    }
                    let xa = x_a_matrix(&space, a, &p).unwrap();
                    let xb_sh = x_a_matrix(&space, b, &p.shift_lambda(a)).unwrap();
                    let xb = x_a_matrix(&space, b, &p).unwrap();
                    let xa_sh = x_a_matrix(&space, a, &p.shift_lambda(b)).unwrap();
                    assert!(
                        rel_residual(&(xa * xb_sh), &(xb * xa_sh)) < 1e-11,
                        "braid failed k={k} a={a} b={b}"
                    );
                }
            }
        }
    }

    #[test]
    fn trig_kz_compatibility() {
        // κ z_i ∂_{z_i} X_a − Â_i(z;λ) X_a + X_a Â_i(z;λ+κδ_a) = 0.
        let space = enumerate_basis(2, 2, &reals(&[1.0, 1.0]), &reals(&[1.0, 1.0])).unwrap();
        let p = point(
            &[(0.95, 0.15), (-0.55, 0.65)],
            &[(1.35, 0.22), (-0.75, 0.41)],
            (1.7, 0.6),
        );
        for a in 1..=2 {
            let xop = qdd_factor(&space, a).unwrap();
            let xa = xop.eval(&p).unwrap();
            for i in 1..=2 {
                let ai = kz_coeff(&space, i, Flavor::Trig).unwrap();
                let lhs = xop.partial(&p, Var::Z(i)).unwrap() * (p.kappa * p.z[i - 1])
                    - ai.eval(&p).unwrap() * &xa
                    + &xa * ai.eval(&p.shift_lambda(a)).unwrap();
                let zero = zeros(space.dim(), space.dim());
                let denom = 1.0 + crate::linalg::max_abs(&(ai.eval(&p).unwrap() * &xa));
                assert!(
                    crate::linalg::max_abs(&(&lhs - &zero)) / denom < 1e-11,
                    "compat failed a={a} i={i}"
                );
            }
        }
        let _ = eye(1);
    }
}
