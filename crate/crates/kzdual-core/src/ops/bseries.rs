//! The zero-weight operator series `B_ab(t)` and the Gamma-ratio scalars
//! `C_ab(t)`.
//!
//! ```text
//! B_ab(t) = 1 + Σ_{s≥1} e_ba^s e_ab^s ∏_{j=1}^s 1/( j (t − e_aa + e_bb − j) )
//! ```
//!
//! The operator product is read right-to-left: on a weight space `[m]` the
//! Cartan factor is the scalar `∏_j 1/(j(t − m_a + m_b − j))`, applied first,
//! followed by `e_ab^s` and `e_ba^s`. The series truncates at the nilpotency
//! degree of `e_ab` on the space.

use crate::glk::{Leg, TensorWeightSpace};
use crate::linalg::{cr, eye, C64, CMat};
use crate::{CoreError, Result};

/// Hard cap on the truncation scan; reached only on misuse (a non-locally
/// finite direction, e.g. lowering into a complex-weight row).
const MAX_SERIES_LEN: usize = 512;

/// Matrix of `B_ab(t)` on the weight space. Zero-dimensional spaces yield the
/// empty matrix.
pub fn b_series(space: &TensorWeightSpace, a: usize, b: usize, t: C64) -> Result<CMat> {
    if a == b || a < 1 || b < 1 || a > space.k || b > space.k {
        return Err(CoreError::IndexRange(format!(
            "B indices ({a},{b}) invalid for k={}",
            space.k
        )));
    }
    let dim = space.dim();
    let mut acc = eye(dim);
    if dim == 0 {
        return Ok(acc);
    }
    let ma = space.m[a - 1];
    let mb = space.m[b - 1];

    // Running products: up = e_ab^s (into the s-fold shifted space).
    let mut current = space.clone();
    let mut up = eye(dim);
    let mut cartan = cr(1.0);
    for s in 1..=MAX_SERIES_LEN {
        // Pole of the Cartan factor: t = m_a − m_b + j.
        let denom = t - ma + mb - cr(s as f64);
        if denom.norm() < 1e-12 {
            return Err(CoreError::SingularPoint(format!(
                "B_{a}{b} pole at j = {s} on weight (m_a - m_b = {})",
                ma - mb
            )));
        }
        cartan /= cr(s as f64) * denom;
        let (next, raise) = current.generator_matrix(a, b, Leg::Total)?;
        up = raise * up;
        if next.dim() == 0 || up.iter().all(|v| v.norm() == 0.0) {
            return Ok(acc);
        }
        // Descend back: e_ba^s from the shifted space.
        let mut down = eye(next.dim());
        let mut sp = next.clone();
        for _ in 0..s {
            let (lower_sp, lower) = sp.generator_matrix(b, a, Leg::Total)?;
            down = lower * down;
            sp = lower_sp;
        }
        acc += (&down * &up) * cartan;
        current = next;
    }
    Err(CoreError::NonTruncating(format!(
        "B_{a}{b} did not truncate within {MAX_SERIES_LEN} terms"
    )))
}

/// Scalar by which `C_ab(t)` acts on a weight space, via the finite-product
/// restriction `∏_{s=1}^{w_b} (t − w_a + s − 1)/(t + s)`; valid for complex
/// `w_a` provided `w_b` is a nonnegative integer.
pub fn c_product(t: C64, wa: C64, wb: i64) -> Result<C64> {
    if wb < 0 {
        return Err(CoreError::NonIntegerWeight {
            name: "w_b".into(),
            value: cr(wb as f64),
        });
    }
    let mut acc = cr(1.0);
    for s in 1..=wb {
        let den = t + cr(s as f64);
        if den.norm() < 1e-12 {
            return Err(CoreError::SingularPoint(format!("C pole at t = -{s}")));
        }
        acc *= (t - wa + cr((s - 1) as f64)) / den;
    }
    Ok(acc)
}

/// The Gamma-ratio form `Γ(t+1)Γ(t−w_a+w_b) / (Γ(t−w_a)Γ(t+w_b+1))`,
/// evaluated with a Lanczos approximation. Used as a cross-check of
/// `c_product`.
pub fn c_gamma(t: C64, wa: C64, wb: C64) -> C64 {
    gamma(t + cr(1.0)) * gamma(t - wa + wb) / (gamma(t - wa) * gamma(t + wb + cr(1.0)))
}

/// The scalar of `C_ab(t)` restricted to the weight space carried by
/// `weights` (`m` for the `gl_k` operators, `l` for `gl_n`). The entry
/// `weights[b-1]` must be a nonnegative integer.
pub fn c_scalar(t: C64, a: usize, b: usize, weights: &[C64]) -> Result<C64> {
    if a < 1 || b < 1 || a > weights.len() || b > weights.len() || a == b {
        return Err(CoreError::IndexRange(format!("C indices ({a},{b})")));
    }
    let wb = crate::glk::as_nonneg_int(weights[b - 1]).ok_or_else(|| CoreError::NonIntegerWeight {
        name: format!("weight_{b}"),
        value: weights[b - 1],
    })?;
    c_product(t, weights[a - 1], wb)
}

/// Complex Gamma via the Lanczos approximation (g = 7, 9 terms) with the
/// reflection formula for `Re z < 0.5`.
pub fn gamma(z: C64) -> C64 {
    const G: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    let pi = std::f64::consts::PI;
    if z.re < 0.5 {
        // Γ(z) Γ(1−z) = π / sin(πz)
        return cr(pi) / ((z * pi).sin() * gamma(cr(1.0) - z));
    }
    let zz = z - cr(1.0);
    let mut x = cr(G[0]);
    for (i, &gi) in G.iter().enumerate().skip(1) {
        x += cr(gi) / (zz + cr(i as f64));
    }
    let t = zz + cr(7.5);
    cr((2.0 * pi).sqrt()) * t.powc(zz + cr(0.5)) * (-t).exp() * x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::glk::{enumerate_basis, reals};
    use crate::linalg::{c, max_abs, rel_residual};

    fn space22(l: &[f64], m: &[f64]) -> TensorWeightSpace {
        enumerate_basis(2, l.len(), &reals(l), &reals(m)).unwrap()
    }

    #[test]
    fn b_on_vector_rep() {
        // V_1 of gl_2: B_12(t) x_1 = x_1, B_12(t) x_2 = ((t+1)/t) x_2.
        let t = c(1.37, 0.42);
        let top = space22(&[1.0], &[1.0, 0.0]);
        let b = b_series(&top, 1, 2, t).unwrap();
        assert!((b[(0, 0)] - cr(1.0)).norm() < 1e-15);
        let bot = space22(&[1.0], &[0.0, 1.0]);
        let b = b_series(&bot, 1, 2, t).unwrap();
        assert!((b[(0, 0)] - (t + cr(1.0)) / t).norm() < 1e-14);
    }

    #[test]
    fn b_fixes_highest_weight_vector() {
        // On a vector killed by e_ab every s ≥ 1 term vanishes.
        let top = space22(&[3.0], &[3.0, 0.0]);
        let b = b_series(&top, 1, 2, c(0.73, -1.1)).unwrap();
        assert!((b[(0, 0)] - cr(1.0)).norm() == 0.0);
    }

    #[test]
    fn bb_inversion_relation() {
        // B_ab(t) B_ba(−t) = 1 − (e_aa − e_bb)/t on each weight space.
        for (l, m) in [
            (vec![1.0], vec![0.0, 1.0]),
            (vec![2.0, 1.0], vec![2.0, 1.0]),
            (vec![2.0, 2.0], vec![2.0, 2.0]),
        ] {
            let space = space22(&l, &m);
            let t = c(0.83, 0.61);
            let lhs = b_series(&space, 1, 2, t).unwrap() * b_series(&space, 2, 1, -t).unwrap();
            let scalar = cr(1.0) - (space.m[0] - space.m[1]) / t;
            let rhs = eye(space.dim()) * scalar;
            assert!(rel_residual(&lhs, &rhs) < 1e-13);
        }
    }

    #[test]
    fn bb_on_x2_matches_paper_value() {
        let bot = space22(&[1.0], &[0.0, 1.0]);
        let t = c(0.9, -0.3);
        let lhs = b_series(&bot, 1, 2, t).unwrap() * b_series(&bot, 2, 1, -t).unwrap();
        assert!((lhs[(0, 0)] - (t + cr(1.0)) / t).norm() < 1e-14);
    }

    #[test]
    fn bbb_braid_relation() {
        // gl_3 on a 3-dim weight space.
        let space = enumerate_basis(3, 2, &reals(&[2.0, 1.0]), &reals(&[1.0, 1.0, 1.0])).unwrap();
        let (t, s) = (c(1.9, 0.7), c(-0.8, 0.35));
        let lhs = b_series(&space, 1, 2, t - s).unwrap()
            * b_series(&space, 1, 3, t).unwrap()
            * b_series(&space, 2, 3, s).unwrap();
        let rhs = b_series(&space, 2, 3, s).unwrap()
            * b_series(&space, 1, 3, t).unwrap()
            * b_series(&space, 1, 2, t - s).unwrap();
        assert!(rel_residual(&lhs, &rhs) < 1e-13);
    }

    #[test]
    fn b_commutes_with_cartan() {
        // Zero weight: B is a square matrix on each weight space and commutes
        // with every total Cartan (which acts as the scalar m_a there).
        let space = space22(&[2.0, 1.0], &[2.0, 1.0]);
        let b = b_series(&space, 1, 2, c(1.3, 0.4)).unwrap();
        assert_eq!(b.shape(), (space.dim(), space.dim()));
        for a in 1..=2 {
            let (_, e) = space.generator_matrix(a, a, Leg::Total).unwrap();
            assert!(max_abs(&crate::linalg::commutator(&b, &e)) < 1e-14);
        }
    }

    #[test]
    fn b_pole_reported() {
        let bot = space22(&[1.0], &[0.0, 1.0]);
        // Pole at t = m_a − m_b + j = −1 + 1 = 0.
        let err = b_series(&bot, 1, 2, cr(0.0));
        assert!(matches!(err, Err(CoreError::SingularPoint(_))));
    }

    #[test]
    fn c_product_examples() {
        // m_a = m_b = 1: C(t) = (t−1)/(t+1).
        let t = c(0.67, 0.21);
        let got = c_product(t, cr(1.0), 1).unwrap();
        assert!((got - (t - cr(1.0)) / (t + cr(1.0))).norm() < 1e-15);
        // Empty product.
        assert_eq!(c_product(t, cr(5.0), 0).unwrap(), cr(1.0));
        // Pole at t = -1.
        assert!(matches!(
            c_product(cr(-1.0), cr(1.0), 1),
            Err(CoreError::SingularPoint(_))
        ));
    }

    #[test]
    fn c_gamma_matches_product_for_integers() {
        let t = c(0.43, 0.78);
        for (wa, wb) in [(2i64, 2i64), (1, 3), (3, 1)] {
            let prod = c_product(t, cr(wa as f64), wb).unwrap();
            let gam = c_gamma(t, cr(wa as f64), cr(wb as f64));
            assert!(
                (prod - gam).norm() / prod.norm().max(1.0) < 1e-12,
                "wa={wa} wb={wb}"
            );
        }
    }

    #[test]
    fn c_product_complex_continuation() {
        // Complex w_a: the finite product continues the Gamma ratio.
        let t = c(1.21, -0.5);
        let wa = c(2.3, 0.7);
        let prod = c_product(t, wa, 2).unwrap();
        let gam = c_gamma(t, wa, cr(2.0));
        assert!((prod - gam).norm() < 1e-12);
    }

    #[test]
    fn gamma_reference_values() {
        assert!((gamma(cr(0.5)) - cr(std::f64::consts::PI.sqrt())).norm() < 1e-13);
        assert!((gamma(cr(6.0)) - cr(120.0)).norm() < 1e-10);
        // Functional equation on a complex argument.
        let z = c(1.3, -2.1);
        assert!((gamma(z + cr(1.0)) - z * gamma(z)).norm() / gamma(z + cr(1.0)).norm() < 1e-13);
    }

    #[test]
    fn b_series_on_empty_space() {
        // m_1 may be any number; (−1, 2) forces a negative x1-exponent, so the
        // space is empty and B is the 0×0 matrix.
        let space = space22(&[1.0], &[-1.0, 2.0]);
        assert_eq!(space.dim(), 0);
        let b = b_series(&space, 1, 2, cr(0.5)).unwrap();
        assert_eq!(b.shape(), (0, 0));
    }
}
