//! Coefficient matrices of the rational/trigonometric KZ and dynamical
//! differential operator families.
//!
//! Conventions: the represented operators are
//!
//! ```text
//! ∇_{z_i}  = κ ∂_{z_i}    − A_i(z; λ)        (rational KZ)
//! ∇̂_{z_i}  = κ z_i ∂_{z_i} − Â_i(z; λ)       (trigonometric KZ)
//! D_{λ_a}  = κ ∂_{λ_a}    − B_a(z; λ)        (rational dynamical)
//! D̂_{λ_a}  = κ λ_a ∂_{λ_a} − B̂_a(z; λ)       (trigonometric dynamical)
//! ```
//!
//! with
//!
//! ```text
//! A_i  = Σ_a λ_a (e_aa)^{(i)} + Σ_{j≠i} Ω^{(ij)} / (z_i − z_j)
//! Â_i  = Σ_a (λ_a − e_aa/2)(e_aa)^{(i)} + Σ_{j≠i} r^{(ij)}(z_i/z_j)
//! B_a  = Σ_i z_i (e_aa)^{(i)} + Σ_{b≠a} (e_ab e_ba − e_aa)/(λ_a − λ_b)
//! B̂_a  = −e_aa²/2 + Σ_i z_i (e_aa)^{(i)} + Σ_b Σ_{i<j} (e_ab)^{(i)}(e_ba)^{(j)}
//!        + Σ_{b≠a} λ_b/(λ_a − λ_b) (e_ab e_ba − e_aa)
//! ```
//!
//! where `r(x) = Ω/(x−1) + Ω₊` and un-superscripted generators are coproduct
//! totals (scalars `m_a` on a fixed weight space for the Cartans).

use std::sync::Arc;

use crate::glk::{CasimirVariant, Leg, TensorWeightSpace};
use crate::linalg::{cr, eye, zeros, CMat};
use crate::ops::{OpKind, ParamPoint, ParametricOperator, Var};
use crate::{CoreError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    Rational,
    Trig,
}

const COINCIDENCE_TOL: f64 = 1e-12;

pub(crate) fn check_distinct(vals: &[crate::linalg::C64], what: &str) -> Result<()> {
    let scale = vals.iter().map(|v| v.norm()).fold(1.0, f64::max);
    for i in 0..vals.len() {
        for j in (i + 1)..vals.len() {
            if (vals[i] - vals[j]).norm() <= COINCIDENCE_TOL * scale {
                return Err(CoreError::SingularPoint(format!(
                    "coincident {what}: {what}_{} = {what}_{}",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    Ok(())
}

pub(crate) fn check_nonzero(vals: &[crate::linalg::C64], what: &str) -> Result<()> {
    for (i, v) in vals.iter().enumerate() {
        if v.norm() <= COINCIDENCE_TOL {
            return Err(CoreError::SingularPoint(format!("{what}_{} = 0", i + 1)));
        }
    }
    Ok(())
}

/// The classical trigonometric r-matrix `r(x) = Ω/(x−1) + Ω₊` on legs `(i,j)`.
pub fn classical_r(
    space: &TensorWeightSpace,
    i: usize,
    j: usize,
    x: crate::linalg::C64,
) -> Result<CMat> {
    let omega = space.casimir_matrix(i, j, CasimirVariant::Full)?;
    let plus = space.casimir_matrix(i, j, CasimirVariant::Plus)?;
    Ok(omega / (x - cr(1.0)) + plus)
}

/// KZ coefficient matrix family (`A_i` or `Â_i`).
pub fn kz_coeff(space: &TensorWeightSpace, i: usize, flavor: Flavor) -> Result<ParametricOperator> {
    kz_coeff_inner(space, i, flavor, CasimirVariant::Full)
}

/// Negative-control variant: the Casimir replaced by its Ω₊ half only.
/// Breaks flatness by design; used by the verifier to guard against vacuous
/// passes.
pub fn kz_coeff_corrupted(
    space: &TensorWeightSpace,
    i: usize,
    flavor: Flavor,
) -> Result<ParametricOperator> {
    kz_coeff_inner(space, i, flavor, CasimirVariant::Plus)
}

fn kz_coeff_inner(
    space: &TensorWeightSpace,
    i: usize,
    flavor: Flavor,
    omega_variant: CasimirVariant,
) -> Result<ParametricOperator> {
    if i < 1 || i > space.n {
        return Err(CoreError::IndexRange(format!("factor index {i}")));
    }
    let n = space.n;
    let dim = space.dim();
    let cartans: Arc<Vec<CMat>> = Arc::new(
        (1..=space.k)
            .map(|a| Ok(space.generator_matrix(a, a, Leg::Factor(i))?.1))
            .collect::<Result<_>>()?,
    );
    // Ω^{(ij)} (and Ω₊^{(ij)} in the trig case) for every j ≠ i; index j-1.
    let mut omegas: Vec<Option<CMat>> = vec![None; n];
    let mut omega_plus: Vec<Option<CMat>> = vec![None; n];
    for j in 1..=n {
        if j != i {
            omegas[j - 1] = Some(space.casimir_matrix(i, j, omega_variant)?);
            if flavor == Flavor::Trig {
                omega_plus[j - 1] = Some(space.casimir_matrix(i, j, CasimirVariant::Plus)?);
            }
        }
    }
    let omegas = Arc::new(omegas);
    let omega_plus = Arc::new(omega_plus);
    let m = space.m.clone();

    let eval = {
        let cartans = cartans.clone();
        let omegas = omegas.clone();
        let omega_plus = omega_plus.clone();
        move |p: &ParamPoint| -> Result<CMat> {
            check_distinct(&p.z, "z")?;
            if flavor == Flavor::Trig {
                check_nonzero(&p.z, "z")?;
            }
            let mut acc = zeros(dim, dim);
            for (a, e) in cartans.iter().enumerate() {
                let coeff = match flavor {
                    Flavor::Rational => p.lambda[a],
                    Flavor::Trig => p.lambda[a] - m[a] / cr(2.0),
                };
                acc += e * coeff;
            }
            for j in 1..=n {
                if j == i {
                    continue;
                }
                match flavor {
                    Flavor::Rational => {
                        acc += omegas[j - 1].as_ref().unwrap() / (p.z[i - 1] - p.z[j - 1]);
                    }
                    Flavor::Trig => {
                        let x = p.z[i - 1] / p.z[j - 1];
                        acc += omegas[j - 1].as_ref().unwrap() / (x - cr(1.0));
                        acc += omega_plus[j - 1].as_ref().unwrap();
                    }
                }
            }
            Ok(acc)
        }
    };

    let partial = move |p: &ParamPoint, var: Var| -> Option<Result<CMat>> {
        let res = (|| -> Result<CMat> {
            let mut acc = zeros(dim, dim);
            match var {
                Var::Lambda(a) => {
                    acc += &cartans[a - 1] * cr(1.0);
                }
                Var::Z(v) => {
                    for j in 1..=n {
                        if j == i {
                            continue;
                        }
                        let om = omegas[j - 1].as_ref().unwrap();
                        match flavor {
                            Flavor::Rational => {
                                let d = p.z[i - 1] - p.z[j - 1];
                                if v == i {
                                    acc -= om / (d * d);
                                } else if v == j {
                                    acc += om / (d * d);
                                }
                            }
                            Flavor::Trig => {
                                let x = p.z[i - 1] / p.z[j - 1];
                                let den = (x - cr(1.0)) * (x - cr(1.0));
                                if v == i {
                                    acc -= om / (den * p.z[j - 1]);
                                } else if v == j {
                                    acc += om * (p.z[i - 1] / (den * p.z[j - 1] * p.z[j - 1]));
                                }
                            }
                        }
                    }
                }
            }
            Ok(acc)
        })();
        Some(res)
    };

    Ok(ParametricOperator::new(
        OpKind::DiffCoeff {
            var: Var::Z(i),
            trig: flavor == Flavor::Trig,
        },
        dim,
        Arc::new(eval),
        Some(Arc::new(partial)),
    ))
}

/// Dynamical coefficient matrix family (`B_a` or `B̂_a`).
pub fn dd_coeff(space: &TensorWeightSpace, a: usize, flavor: Flavor) -> Result<ParametricOperator> {
    if a < 1 || a > space.k {
        return Err(CoreError::IndexRange(format!("Cartan index {a}")));
    }
    let k = space.k;
    let n = space.n;
    let dim = space.dim();
    let ma = space.m[a - 1];
    // z-linear part: (e_aa)^{(i)} for every i.
    let zdiags: Arc<Vec<CMat>> = Arc::new(
        (1..=n)
            .map(|i| Ok(space.generator_matrix(a, a, Leg::Factor(i))?.1))
            .collect::<Result<_>>()?,
    );
    // T_b = e_ab e_ba − e_aa (totals); e_aa acts as m_a.
    let mut tb: Vec<Option<CMat>> = vec![None; k];
    for b in 1..=k {
        if b != a {
            tb[b - 1] = Some(space.ee_product_total(a, b)? - eye(dim) * ma);
        }
    }
    let tb = Arc::new(tb);
    // Trig-only constant block: −e_aa²/2 + Σ_b Σ_{i<j} (e_ab)^{(i)}(e_ba)^{(j)}.
    let trig_const = if flavor == Flavor::Trig {
        let mut acc = &eye(dim) * (-(ma * ma) / cr(2.0));
        for b in 1..=k {
            for i in 1..n {
                for j in (i + 1)..=n {
                    let (midsp, first) = space.generator_matrix(b, a, Leg::Factor(j))?;
                    let (_, second) = midsp.generator_matrix(a, b, Leg::Factor(i))?;
                    acc += second * first;
                }
            }
        }
        Some(Arc::new(acc))
    } else {
        None
    };

    let eval = {
        let zdiags = zdiags.clone();
        let tb = tb.clone();
        let trig_const = trig_const.clone();
        move |p: &ParamPoint| -> Result<CMat> {
            check_distinct(&p.lambda, "lambda")?;
            if flavor == Flavor::Trig {
                check_nonzero(&p.lambda, "lambda")?;
            }
            let mut acc = match &trig_const {
                Some(c) => (**c).clone(),
                None => zeros(dim, dim),
            };
            for (i, d) in zdiags.iter().enumerate() {
                acc += d * p.z[i];
            }
            for b in 1..=k {
                if b == a {
                    continue;
                }
                let t = tb[b - 1].as_ref().unwrap();
                let den = p.lambda[a - 1] - p.lambda[b - 1];
                match flavor {
                    Flavor::Rational => acc += t / den,
                    Flavor::Trig => acc += t * (p.lambda[b - 1] / den),
                }
            }
            Ok(acc)
        }
    };

    let partial = move |p: &ParamPoint, var: Var| -> Option<Result<CMat>> {
        let res = (|| -> Result<CMat> {
            let mut acc = zeros(dim, dim);
            match var {
                Var::Z(i) => acc += &zdiags[i - 1] * cr(1.0),
                Var::Lambda(v) => {
                    for b in 1..=k {
                        if b == a {
                            continue;
                        }
                        let t = tb[b - 1].as_ref().unwrap();
                        let den = p.lambda[a - 1] - p.lambda[b - 1];
                        let den2 = den * den;
                        match flavor {
                            Flavor::Rational => {
                                if v == a {
                                    acc -= t / den2;
                                } else if v == b {
                                    acc += t / den2;
                                }
                            }
                            Flavor::Trig => {
                                if v == a {
                                    acc -= t * (p.lambda[b - 1] / den2);
                                } else if v == b {
                                    acc += t * (p.lambda[a - 1] / den2);
                                }
                            }
                        }
                    }
                }
            }
            Ok(acc)
        })();
        Some(res)
    };

    Ok(ParametricOperator::new(
        OpKind::DiffCoeff {
            var: Var::Lambda(a),
            trig: flavor == Flavor::Trig,
        },
        dim,
        Arc::new(eval),
        Some(Arc::new(partial)),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::glk::reals;
    use crate::glk::{enumerate_basis, CasimirVariant};
    use crate::linalg::{c, max_abs, rel_residual, C64};

    fn point(z: &[(f64, f64)], l: &[(f64, f64)], kappa: (f64, f64)) -> ParamPoint {
        ParamPoint::new(
            z.iter().map(|&(re, im)| c(re, im)).collect(),
            l.iter().map(|&(re, im)| c(re, im)).collect(),
            c(kappa.0, kappa.1),
        )
    }

    #[test]
    fn rational_kz_n1_is_cartan_sum() {
        let space = enumerate_basis(2, 1, &reals(&[2.0]), &reals(&[1.0, 1.0])).unwrap();
        let op = kz_coeff(&space, 1, Flavor::Rational).unwrap();
        let p = point(&[(0.3, 0.1)], &[(1.2, 0.0), (-0.7, 0.4)], (2.0, 0.0));
        let got = op.eval(&p).unwrap();
        let mut expect = zeros(space.dim(), space.dim());
        for a in 1..=2 {
            let (_, e) = space.generator_matrix(a, a, Leg::Factor(1)).unwrap();
            expect += e * p.lambda[a - 1];
        }
        assert!(max_abs(&(got - expect)) == 0.0);
    }

    #[test]
    fn rational_kz_rank_one_scalar() {
        // k = 1, n = 2: A_1 = λ_1 e_11^{(1)} + l_1 l_2/(z_1−z_2) · Id.
        let space = enumerate_basis(1, 2, &reals(&[3.0, 2.0]), &reals(&[5.0])).unwrap();
        let op = kz_coeff(&space, 1, Flavor::Rational).unwrap();
        let p = point(&[(0.9, 0.0), (-0.4, 0.3)], &[(0.8, -0.2)], (2.0, 0.0));
        let got = op.eval(&p).unwrap();
        let expect = p.lambda[0] * cr(3.0) + cr(6.0) / (p.z[0] - p.z[1]);
        assert!((got[(0, 0)] - expect).norm() < 1e-14);
    }

    #[test]
    fn classical_r_tends_to_omega_plus() {
        let space = enumerate_basis(2, 2, &reals(&[1.0, 1.0]), &reals(&[1.0, 1.0])).unwrap();
        let plus = space.casimir_matrix(1, 2, CasimirVariant::Plus).unwrap();
        let r = classical_r(&space, 1, 2, cr(1e9)).unwrap();
        assert!(max_abs(&(r - plus)) < 1e-8);
    }

    #[test]
    fn rational_dd_rank_one_is_z_sum() {
        let space = enumerate_basis(1, 2, &reals(&[3.0, 2.0]), &reals(&[5.0])).unwrap();
        let op = dd_coeff(&space, 1, Flavor::Rational).unwrap();
        let p = point(&[(0.9, 0.0), (-0.4, 0.3)], &[(0.8, -0.2)], (2.0, 0.0));
        let got = op.eval(&p).unwrap();
        // Σ_i z_i (e_11)^{(i)} with exponents (3, 2) on the single basis vector.
        let expect = p.z[0] * cr(3.0) + p.z[1] * cr(2.0);
        assert!((got[(0, 0)] - expect).norm() < 1e-14);
    }

    #[test]
    fn rational_dd_b_sum_eigenvalue() {
        // k=2, n=1, V_l at weight (l−s, s): the b-sum term has eigenvalue s(l−s).
        let l = 5i64;
        for s in 0..=l {
            let space =
                enumerate_basis(2, 1, &reals(&[l as f64]), &reals(&[(l - s) as f64, s as f64]))
                    .unwrap();
            let op = dd_coeff(&space, 1, Flavor::Rational).unwrap();
            let p = point(&[(0.0, 0.0)], &[(1.3, 0.0), (-0.4, 0.0)], (2.0, 0.0));
            let got = op.eval(&p).unwrap();
            let expect = cr((s * (l - s)) as f64) / (p.lambda[0] - p.lambda[1]);
            assert!((got[(0, 0)] - expect).norm() < 1e-12, "s={s}");
        }
    }

    #[test]
    fn trig_dd_n1_at_zero_z() {
        // n = 1, z = 0: B̂_a = −e_aa²/2 + Σ_{b≠a} λ_b/(λ_a−λ_b)(e_ab e_ba − e_aa).
        let space = enumerate_basis(2, 1, &reals(&[4.0]), &reals(&[3.0, 1.0])).unwrap();
        let op = dd_coeff(&space, 1, Flavor::Trig).unwrap();
        let p = point(&[(0.0, 0.0)], &[(1.1, 0.2), (-0.6, -0.3)], (2.0, 0.0));
        let got = op.eval(&p).unwrap();
        let ma = space.m[0];
        let t = space.ee_product_total(1, 2).unwrap() - eye(1) * ma;
        let expect =
            &eye(1) * (-(ma * ma) / cr(2.0)) + t * (p.lambda[1] / (p.lambda[0] - p.lambda[1]));
        assert!(max_abs(&(got - expect)) < 1e-13);
    }

    #[test]
    fn coincident_points_are_singular() {
        let space = enumerate_basis(2, 2, &reals(&[1.0, 1.0]), &reals(&[1.0, 1.0])).unwrap();
        let op = kz_coeff(&space, 1, Flavor::Rational).unwrap();
        let p = point(&[(0.5, 0.0), (0.5, 0.0)], &[(1.0, 0.0), (2.0, 0.0)], (2.0, 0.0));
        assert!(matches!(op.eval(&p), Err(CoreError::SingularPoint(_))));
    }

    #[test]
    fn analytic_partials_match_finite_differences() {
        let space = enumerate_basis(2, 2, &reals(&[2.0, 1.0]), &reals(&[2.0, 1.0])).unwrap();
        let p = point(
            &[(0.7, 0.2), (-0.6, -0.4)],
            &[(1.4, 0.3), (-0.9, 0.6)],
            (1.7, 0.5),
        );
        let ops: Vec<ParametricOperator> = vec![
            kz_coeff(&space, 1, Flavor::Rational).unwrap(),
            kz_coeff(&space, 2, Flavor::Trig).unwrap(),
            dd_coeff(&space, 1, Flavor::Rational).unwrap(),
            dd_coeff(&space, 2, Flavor::Trig).unwrap(),
        ];
        for op in &ops {
            for var in [Var::Z(1), Var::Z(2), Var::Lambda(1), Var::Lambda(2)] {
                let analytic = op.partial(&p, var).unwrap();
                let fd = op.fd_partial(&p, var).unwrap();
                assert!(
                    rel_residual(&analytic, &fd) < 1e-8,
                    "partial mismatch at {var:?}"
                );
            }
        }
    }

    #[test]
    fn flatness_spot_checks() {
        // κ(θ_u A_v − θ_v A_u) = [A_u, A_v] for every family pair, with
        // θ = ∂ (rational) or z∂_z (trigonometric).
        let space = enumerate_basis(2, 2, &reals(&[1.0, 1.0]), &reals(&[1.0, 1.0])).unwrap();
        let p = point(
            &[(0.8, 0.15), (-0.5, -0.55)],
            &[(1.2, 0.4), (-0.8, 0.25)],
            (1.9, 0.35),
        );
        let kappa = p.kappa;
        let theta = |v: Var, p: &ParamPoint| -> C64 {
            match v {
                Var::Z(i) => p.z[i - 1],
                Var::Lambda(a) => p.lambda[a - 1],
            }
        };
        let cases: Vec<(ParametricOperator, Var, ParametricOperator, Var, bool)> = vec![
            (
                kz_coeff(&space, 1, Flavor::Rational).unwrap(),
                Var::Z(1),
                kz_coeff(&space, 2, Flavor::Rational).unwrap(),
                Var::Z(2),
                false,
            ),
            (
                kz_coeff(&space, 1, Flavor::Trig).unwrap(),
                Var::Z(1),
                kz_coeff(&space, 2, Flavor::Trig).unwrap(),
                Var::Z(2),
                true,
            ),
            (
                dd_coeff(&space, 1, Flavor::Rational).unwrap(),
                Var::Lambda(1),
                dd_coeff(&space, 2, Flavor::Rational).unwrap(),
                Var::Lambda(2),
                false,
            ),
            (
                dd_coeff(&space, 1, Flavor::Trig).unwrap(),
                Var::Lambda(1),
                dd_coeff(&space, 2, Flavor::Trig).unwrap(),
                Var::Lambda(2),
                true,
            ),
            (
                kz_coeff(&space, 1, Flavor::Rational).unwrap(),
                Var::Z(1),
                dd_coeff(&space, 2, Flavor::Rational).unwrap(),
                Var::Lambda(2),
                false,
            ),
        ];
        for (opu, u, opv, v, trig) in cases {
            let au = opu.eval(&p).unwrap();
            let av = opv.eval(&p).unwrap();
            let mut du_av = opv.partial(&p, u).unwrap();
            let mut dv_au = opu.partial(&p, v).unwrap();
            if trig {
                du_av *= theta(u, &p);
                dv_au *= theta(v, &p);
            }
            let lhs = (du_av - dv_au) * kappa;
            let rhs = &au * &av - &av * &au;
            assert!(rel_residual(&lhs, &rhs) < 1e-12, "flatness failed");
        }
    }
}
