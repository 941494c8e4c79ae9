//! The qKZ shift factors
//!
//! ```text
//! K_i(z; λ) = ( R_in(z_in) ⋯ R_{i,i+1}(z_{i,i+1}) )⁻¹
//!             × ∏_a (λ_a^{−e_aa})^{(i)} · R_{1i}(z_{1i}−κ) ⋯ R_{i−1,i}(z_{i−1,i}−κ)
//! ```
//!
//! with `z_uv = z_u − z_v` and `R_uv(t) = (R_{W_u W_v}(t))^{(uv)}`. The qKZ
//! operator is `Z_{z_i} = K_i T_{z_i}`.

use std::sync::Arc;

use crate::glk::{as_nonneg_int, TensorWeightSpace};
use crate::linalg::{eye, solve_square, zeros, C64, CMat};
use crate::ops::kzdd::check_nonzero;
use crate::ops::rmatrix::{r_factor_on_space, RMatrixTable};
use crate::ops::{OpKind, ParamPoint, ParametricOperator, Var};
use crate::{CoreError, Result};

/// Diagonal of `∏_a (λ_a^{−e_aa})^{(i)}`.
fn lambda_power_diag(space: &TensorWeightSpace, i: usize, lambda: &[C64]) -> CMat {
    let dim = space.dim();
    let mut d = zeros(dim, dim);
    for idx in 0..dim {
        let mut v = C64::new(1.0, 0.0);
        for a in 1..=space.k {
            v *= lambda[a - 1].powc(-space.entry(idx, a, i));
        }
        d[(idx, idx)] = v;
    }
    d
}

/// Bundle of R-matrix tables for all ordered factor pairs of a space.
#[derive(Debug, Clone)]
pub struct RTables {
    tables: Vec<Vec<Option<Arc<RMatrixTable>>>>,
}

impl RTables {
    /// Depth: the largest joint lowering level two factors can carry inside
    /// the weight space, bounded by `Σ_{a≥2} m_a`.
    pub fn for_space(space: &TensorWeightSpace) -> Result<Self> {
        let depth: i64 = space.m[1..]
            .iter()
            .map(|&v| as_nonneg_int(v).unwrap_or(0))
            .sum();
        let n = space.n;
        let mut tables: Vec<Vec<Option<Arc<RMatrixTable>>>> = vec![vec![None; n]; n];
        for u in 1..=n {
            for v in 1..=n {
                if u != v {
                    tables[u - 1][v - 1] = Some(Arc::new(RMatrixTable::new(
                        space.k,
                        space.l[u - 1],
                        space.l[v - 1],
                        depth as usize,
                    )?));
                }
            }
        }
        Ok(RTables { tables })
    }

    pub fn get(&self, u: usize, v: usize) -> &RMatrixTable {
        self.tables[u - 1][v - 1].as_ref().expect("u != v")
    }
}

fn k_i_parts(
    space: &TensorWeightSpace,
    tables: &RTables,
    i: usize,
    p: &ParamPoint,
) -> Result<(CMat, CMat, CMat)> {
    check_nonzero(&p.lambda, "lambda")?;
    let n = space.n;
    let dim = space.dim();
    // Printed product R_in ⋯ R_{i,i+1}: descending j.
    let mut pre = eye(dim);
    for j in ((i + 1)..=n).rev() {
        let r = r_factor_on_space(space, tables.get(i, j), i, j, p.z[i - 1] - p.z[j - 1])?;
        pre = pre * r;
    }
    let diag = lambda_power_diag(space, i, &p.lambda);
    let mut post = eye(dim);
    for j in 1..i {
        let r = r_factor_on_space(
            space,
            tables.get(j, i),
            j,
            i,
            p.z[j - 1] - p.z[i - 1] - p.kappa,
        )?;
        post = post * r;
    }
    Ok((pre, diag, post))
}

/// Matrix of `K_i(z; λ)`.
pub fn k_i_matrix(
    space: &TensorWeightSpace,
    tables: &RTables,
    i: usize,
    p: &ParamPoint,
) -> Result<CMat> {
    let (pre, diag, post) = k_i_parts(space, tables, i, p)?;
    solve_square(&pre, &(diag * post))
}

/// `K_i` as a parametric shift-factor operator with analytic `∂/∂λ_a`.
pub fn qkz_factor(space: &TensorWeightSpace, i: usize) -> Result<ParametricOperator> {
    if i < 1 || i > space.n {
        return Err(CoreError::IndexRange(format!("factor index {i}")));
    }
    let dim = space.dim();
    let sp = Arc::new(space.clone());
    let tables = Arc::new(RTables::for_space(space)?);
    let eval = {
        let sp = sp.clone();
        let tables = tables.clone();
        move |p: &ParamPoint| k_i_matrix(&sp, &tables, i, p)
    };
    let partial = {
        let sp = sp.clone();
        let tables = tables.clone();
        move |p: &ParamPoint, var: Var| -> Option<Result<CMat>> {
            let Var::Lambda(a) = var else { return None };
            let res = (|| -> Result<CMat> {
                let (pre, diag, post) = k_i_parts(&sp, &tables, i, p)?;
                let mut d = diag;
                for idx in 0..sp.dim() {
                    d[(idx, idx)] *= -sp.entry(idx, a, i) / p.lambda[a - 1];
                }
                solve_square(&pre, &(d * post))
            })();
            Some(res)
        }
    };
    Ok(ParametricOperator::new(
        OpKind::ShiftFactor { var: Var::Z(i) },
        dim,
        Arc::new(eval),
        Some(Arc::new(partial)),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::glk::{enumerate_basis, reals};
    use crate::linalg::{c, cr, max_abs, rel_residual};
    use crate::ops::kzdd::{dd_coeff, Flavor};

    fn point(z: &[(f64, f64)], l: &[(f64, f64)], kappa: (f64, f64)) -> ParamPoint {
        ParamPoint::new(
            z.iter().map(|&(re, im)| c(re, im)).collect(),
            l.iter().map(|&(re, im)| c(re, im)).collect(),
            c(kappa.0, kappa.1),
        )
    }

    #[test]
    fn n1_is_pure_diagonal() {
        let space = enumerate_basis(2, 1, &reals(&[3.0]), &reals(&[2.0, 1.0])).unwrap();
        let tables = RTables::for_space(&space).unwrap();
        let p = point(&[(0.4, 0.2)], &[(1.2, 0.3), (-0.8, 0.5)], (1.9, 0.4));
        let k1 = k_i_matrix(&space, &tables, 1, &p).unwrap();
        let expect = p.lambda[0].powc(cr(-2.0)) * p.lambda[1].powc(cr(-1.0));
        assert!((k1[(0, 0)] - expect).norm() < 1e-14);
    }

    #[test]
    fn last_factor_has_no_inverse_chain() {
        let space = enumerate_basis(2, 2, &reals(&[1.0, 1.0]), &reals(&[1.0, 1.0])).unwrap();
        let tables = RTables::for_space(&space).unwrap();
        let p = point(
            &[(0.9, 0.2), (-0.6, 0.5)],
            &[(1.4, 0.1), (-0.8, 0.3)],
            (1.9, 0.4),
        );
        let k2 = k_i_matrix(&space, &tables, 2, &p).unwrap();
        let d = lambda_power_diag(&space, 2, &p.lambda);
        let r = r_factor_on_space(
            &space,
            tables.get(1, 2),
            1,
            2,
            p.z[0] - p.z[1] - p.kappa,
        )
        .unwrap();
        assert!(rel_residual(&k2, &(d * r)) < 1e-12);
    }

    #[test]
    fn qkz_commutation_identity() {
        // K_i(z;λ) K_j(z+κδ_i;λ) = K_j(z;λ) K_i(z+κδ_j;λ).
        for (k, n, l, m) in [
            (2usize, 2usize, vec![1.0, 1.0], vec![1.0, 1.0]),
            (2, 3, vec![1.0, 1.0, 1.0], vec![2.0, 1.0]),
        ] {
            let space = enumerate_basis(k, n, &reals(&l), &reals(&m)).unwrap();
            let tables = RTables::for_space(&space).unwrap();
            let zs = [(0.85, 0.25), (-0.65, 0.45), (0.15, -0.95)];
            let p = point(&zs[..n], &[(1.5, 0.2), (-0.9, 0.35)], (1.8, 0.5));
            for i in 1..=n {
                for j in 1..=n {
                    if i == j {
                        continue;
                    }
                    let ki = k_i_matrix(&space, &tables, i, &p).unwrap();
                    let kj_sh = k_i_matrix(&space, &tables, j, &p.shift_z(i)).unwrap();
                    let kj = k_i_matrix(&space, &tables, j, &p).unwrap();
                    let ki_sh = k_i_matrix(&space, &tables, i, &p.shift_z(j)).unwrap();
                    assert!(
                        rel_residual(&(ki * kj_sh), &(kj * ki_sh)) < 1e-10,
                        "qKZ commute failed n={n} i={i} j={j}"
                    );
                }
            }
        }
    }

    #[test]
    fn trig_dd_compatibility() {
        // κ λ_a ∂_{λ_a} K_i − B̂_a(z;λ) K_i + K_i B̂_a(z+κδ_i;λ) = 0.
        let space = enumerate_basis(2, 2, &reals(&[1.0, 1.0]), &reals(&[1.0, 1.0])).unwrap();
        let p = point(
            &[(0.95, 0.15), (-0.55, 0.65)],
            &[(1.35, 0.22), (-0.75, 0.41)],
            (1.7, 0.6),
        );
        for i in 1..=2 {
            let kop = qkz_factor(&space, i).unwrap();
            let ki = kop.eval(&p).unwrap();
            for a in 1..=2 {
                let da = dd_coeff(&space, a, Flavor::Trig).unwrap();
                let lhs = kop.partial(&p, Var::Lambda(a)).unwrap() * (p.kappa * p.lambda[a - 1])
                    - da.eval(&p).unwrap() * &ki
                    + &ki * da.eval(&p.shift_z(i)).unwrap();
                let denom = 1.0 + max_abs(&(da.eval(&p).unwrap() * &ki));
                assert!(
                    max_abs(&lhs) / denom < 1e-10,
                    "qKZ/trigDD compat failed i={i} a={a}"
                );
            }
        }
    }

    #[test]
    fn analytic_lambda_partial_matches_fd() {
        let space = enumerate_basis(2, 2, &reals(&[1.0, 1.0]), &reals(&[1.0, 1.0])).unwrap();
        let op = qkz_factor(&space, 1).unwrap();
        let p = point(
            &[(0.9, 0.2), (-0.6, 0.5)],
            &[(1.4, 0.1), (-0.8, 0.3)],
            (1.9, 0.4),
        );
        for a in 1..=2 {
            let an = op.partial(&p, Var::Lambda(a)).unwrap();
            let fd = op.fd_partial(&p, Var::Lambda(a)).unwrap();
            assert!(rel_residual(&an, &fd) < 1e-8);
        }
    }
}
