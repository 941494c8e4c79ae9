//! Selberg-type integrals and their closed forms — the analytic oracles of
//! the quadrature engine.
//!
//! Rational family (nested loops from +∞ around 0):
//!
//! ```text
//! ∫_{γ_m} e^{−ν Σ s_a} ∏ (−s_a)^{−1−l/κ} ∏_{a<b} (s_a−s_b)^{2/κ} d^m s
//!   = (−2πi)^m ν^{m(l−m+1)/κ} ∏_{j=0}^{m−1} Γ(1−1/κ) / ( Γ(1+(l−j)/κ) Γ(1−(j+1)/κ) )
//! ```
//!
//! q-family (vertical lines `Re s_a = −Re l / 2`):
//!
//! ```text
//! ∫ (−x)^{Σ s_a} ∏ Γ(s_a) Γ(−s_a−l/κ) ∏_{a≠b} Γ(s_a−s_b+1/κ)/Γ(s_a−s_b) d^m s
//!   = (2πi)^m (−x)^{(m−1−2l)m/2κ} (1−x)^{m(l−m+1)/κ}
//!     ∏_{j=0}^{m−1} Γ((j−l)/κ) Γ(1+(j+1)/κ) / Γ(1+1/κ)
//! ```

use kzdual_core::linalg::{c, cr, C64};

use crate::contour::{selberg_loops, selberg_mb, QuadParams};
use crate::gamma::{gamma, powc};
use crate::master::{integrate_nested, log_in_window, FactorKind, NestedIntegrand, TrackedFactor};
use crate::{HyperError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelbergKind {
    Rational,
    Q,
}

/// Closed form of the rational Selberg integral.
pub fn selberg_closed_rational(m: usize, l: C64, nu: C64, kappa: C64) -> Result<C64> {
    if nu.re <= 0.0 {
        return Err(HyperError::Region("Re ν must be positive".into()));
    }
    let mf = m as f64;
    let two_pi_i = c(0.0, 2.0 * std::f64::consts::PI);
    let mut value = (-two_pi_i).powi(m as i32) * powc(nu, cr(mf * (1.0 - mf)) / kappa + cr(mf) * l / kappa);
    for j in 0..m {
        let jf = cr(j as f64);
        value *= gamma(cr(1.0) - cr(1.0) / kappa)
            / (gamma(cr(1.0) + (l - jf) / kappa) * gamma(cr(1.0) - (jf + cr(1.0)) / kappa));
    }
    Ok(value)
}

/// Closed form of the q-Selberg integral.
pub fn selberg_closed_q(m: usize, l: C64, x: C64, kappa: C64) -> Result<C64> {
    let neg_x = -x;
    let one_minus = cr(1.0) - x;
    let pi = std::f64::consts::PI;
    if neg_x.norm() == 0.0 || neg_x.arg().abs() >= pi || one_minus.arg().abs() >= pi {
        return Err(HyperError::Region(
            "need −π < arg(−x) < π and −π < arg(1−x) < π".into(),
        ));
    }
    let mf = m as f64;
    let two_pi_i = c(0.0, 2.0 * pi);
    let mut value = two_pi_i.powi(m as i32)
        * powc(neg_x, (cr(mf - 1.0) - cr(2.0) * l) * cr(mf) / (cr(2.0) * kappa))
        * powc(one_minus, cr(mf) * (l - cr(mf) + cr(1.0)) / kappa);
    for j in 0..m {
        let jf = cr(j as f64);
        value *= gamma((jf - l) / kappa) * gamma(cr(1.0) + (jf + cr(1.0)) / kappa)
            / gamma(cr(1.0) + cr(1.0) / kappa);
    }
    Ok(value)
}

/// Closed form dispatcher: `scale` is `ν` (rational) or `x` (q).
pub fn selberg_closed_form(kind: SelbergKind, m: usize, l: C64, scale: C64, kappa: C64) -> Result<C64> {
    match kind {
        SelbergKind::Rational => selberg_closed_rational(m, l, scale, kappa),
        SelbergKind::Q => selberg_closed_q(m, l, scale, kappa),
    }
}

/// Quadrature evaluation of the rational Selberg integral over nested loops,
/// with a refinement-based error estimate.
pub fn selberg_integrate_rational(
    m: usize,
    l: C64,
    nu: C64,
    kappa: C64,
    quad: &QuadParams,
) -> Result<(C64, f64)> {
    if m == 0 {
        return Ok((cr(1.0), 0.0));
    }
    if m > 2 {
        return Err(HyperError::Region("desk-scale gate: m ≤ 2 loops".into()));
    }
    let spec = selberg_loops(m, nu, quad.clone(), 1e-16)?;
    let eval = |spec: &crate::contour::ContourSpec| -> Result<C64> {
        let paths = spec.paths();
        let anchors: Vec<C64> = spec.loops.iter().map(|g| g.anchor()).collect();
        let mut factors = Vec::new();
        let mut anchor_logs = Vec::new();
        for a in 0..m {
            factors.push(TrackedFactor {
                kind: FactorKind::ConstMinusVar { var: a, c: cr(0.0) },
                exponent: cr(-1.0) - l / kappa,
            });
            // arg(−s_a) = 0 at the anchor s_a = −ρ_a.
            anchor_logs.push(log_in_window(-anchors[a], -std::f64::consts::PI, std::f64::consts::PI));
        }
        for a in 0..m {
            for b in (a + 1)..m {
                factors.push(TrackedFactor {
                    kind: FactorKind::VarMinusVar { a, b },
                    exponent: cr(2.0) / kappa,
                });
                // ρ_b > ρ_a: s_a − s_b = ρ_b − ρ_a > 0, arg 0.
                anchor_logs.push(log_in_window(
                    anchors[a] - anchors[b],
                    -std::f64::consts::PI,
                    std::f64::consts::PI,
                ));
            }
        }
        let integrand = NestedIntegrand {
            factors,
            anchor_logs,
            linear: vec![-nu; m],
            prefactor: cr(1.0),
            smooth: Box::new(|_| vec![cr(1.0)]),
            dim: 1,
        };
        Ok(integrate_nested(&paths, &integrand)?[0])
    };
    let coarse = eval(&spec)?;
    let fine = eval(&spec.refined())?;
    let err = 2.0 * (fine - coarse).norm() + 1e-15 * fine.norm();
    Ok((fine, err))
}

/// Quadrature evaluation of the q-Selberg integral on the vertical line
/// (`m = 1` at desk scale).
pub fn selberg_integrate_q(
    m: usize,
    l: C64,
    x: C64,
    kappa: C64,
    quad: &QuadParams,
) -> Result<(C64, f64)> {
    if m == 0 {
        return Ok((cr(1.0), 0.0));
    }
    if m > 1 {
        return Err(HyperError::Region(
            "desk-scale gate: the q-family is integrated only for m = 1".into(),
        ));
    }
    let spec = selberg_mb(m, l, x, kappa, quad.clone(), 1e-16)?;
    let log_neg_x = log_in_window(-x, -std::f64::consts::PI, std::f64::consts::PI);
    let eval = |spec: &crate::contour::ContourSpec| -> Result<C64> {
        let paths = spec.paths();
        let mut acc = c(0.0, 0.0);
        for node in &paths[0].fwd {
            let s = node.t;
            acc += node.w * (s * log_neg_x).exp() * gamma(s) * gamma(-s - l / kappa);
        }
        Ok(acc)
    };
    let coarse = eval(&spec)?;
    let fine = eval(&spec.refined())?;
    let err = 2.0 * (fine - coarse).norm() + 1e-15 * fine.norm();
    Ok((fine, err))
}

/// Quadrature dispatcher matching `selberg_closed_form`.
pub fn selberg_integrate(
    kind: SelbergKind,
    m: usize,
    l: C64,
    scale: C64,
    kappa: C64,
    quad: &QuadParams,
) -> Result<(C64, f64)> {
    match kind {
        SelbergKind::Rational => selberg_integrate_rational(m, l, scale, kappa, quad),
        SelbergKind::Q => selberg_integrate_q(m, l, scale, kappa, quad),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_m1_reduction() {
        // m = 1: (−2πi) ν^{l/κ} / Γ(1+l/κ) — the j = 0 factor Γ(1−1/κ) cancels.
        let (l, nu, kappa) = (cr(2.3), cr(1.7), cr(std::f64::consts::PI));
        let got = selberg_closed_rational(1, l, nu, kappa).unwrap();
        let expect = -c(0.0, 2.0 * std::f64::consts::PI) * powc(nu, l / kappa)
            / gamma(cr(1.0) + l / kappa);
        assert!((got - expect).norm() / expect.norm() < 1e-14);
    }

    #[test]
    fn closed_form_m0_is_one_times_empty() {
        // Empty integral ⇔ empty product: both sides 1.
        let got = selberg_closed_rational(0, cr(2.0), cr(1.0), cr(2.0)).unwrap();
        assert!((got - cr(1.0)).norm() < 1e-15);
        let got = selberg_closed_q(0, cr(-2.0), cr(-0.4), cr(1.6)).unwrap();
        assert!((got - cr(1.0)).norm() < 1e-15);
    }

    #[test]
    fn closed_form_q_m1_reduction() {
        // m = 1 reduction derived from the display:
        // (2πi)(−x)^{−l/κ}(1−x)^{l/κ} Γ(−l/κ).
        let (l, x, kappa) = (c(-0.8, 0.0), c(-0.4, 0.0), cr(1.6));
        let got = selberg_closed_q(1, l, x, kappa).unwrap();
        let expect = c(0.0, 2.0 * std::f64::consts::PI)
            * powc(-x, -l / kappa)
            * powc(cr(1.0) - x, l / kappa)
            * gamma(-l / kappa);
        assert!((got - expect).norm() / expect.norm() < 1e-13);
    }

    #[test]
    fn rational_m1_quadrature_matches_closed_form() {
        let (l, nu, kappa) = (cr(2.3), cr(1.7), cr(std::f64::consts::PI));
        let closed = selberg_closed_rational(1, l, nu, kappa).unwrap();
        let (quad, err) = selberg_integrate_rational(1, l, nu, kappa, &QuadParams::default()).unwrap();
        let rel = (quad - closed).norm() / closed.norm();
        assert!(rel < 1e-8, "rel = {rel:.3e}, err = {err:.3e}");
        assert!((quad - closed).norm() <= err.max(1e-12) * 100.0);
    }

    #[test]
    fn rational_m2_quadrature_matches_closed_form() {
        let (l, nu, kappa) = (cr(2.3), cr(1.7), cr(std::f64::consts::PI));
        let closed = selberg_closed_rational(2, l, nu, kappa).unwrap();
        let (quad, _err) =
            selberg_integrate_rational(2, l, nu, kappa, &QuadParams::default()).unwrap();
        let rel = (quad - closed).norm() / closed.norm();
        assert!(rel < 1e-6, "rel = {rel:.3e}");
    }

    #[test]
    fn q_m1_quadrature_matches_closed_form() {
        let (l, x, kappa) = (c(-0.8, 0.0), c(-0.4, 0.0), cr(1.6));
        let closed = selberg_closed_q(1, l, x, kappa).unwrap();
        let (quad, _err) = selberg_integrate_q(1, l, x, kappa, &QuadParams::default()).unwrap();
        let rel = (quad - closed).norm() / closed.norm();
        assert!(rel < 1e-8, "rel = {rel:.3e}");
    }

    #[test]
    fn nu_scaling_law() {
        // value(ν) = ν^{m(l−m+1)/κ} · value(1) — checked on the quadrature side
        // at two ν values.
        let (l, kappa) = (cr(1.9), cr(2.4));
        for m in [1usize, 2] {
            let nu1 = cr(1.3);
            let nu2 = cr(2.9);
            let (v1, _) = selberg_integrate_rational(m, l, nu1, kappa, &QuadParams::default()).unwrap();
            let (v2, _) = selberg_integrate_rational(m, l, nu2, kappa, &QuadParams::default()).unwrap();
            let expo = cr(m as f64) * (l - cr(m as f64) + cr(1.0)) / kappa;
            let predicted = v1 * powc(nu2 / nu1, expo);
            let rel = (v2 - predicted).norm() / v2.norm();
            assert!(rel < 1e-6, "m = {m}: rel = {rel:.3e}");
        }
    }

    #[test]
    fn region_violations_rejected() {
        assert!(selberg_closed_rational(1, cr(2.0), cr(-1.0), cr(2.0)).is_err());
        assert!(selberg_integrate_q(1, cr(0.5), cr(-0.4), cr(1.6), &QuadParams::default()).is_err());
        assert!(selberg_integrate_rational(3, cr(2.0), cr(1.0), cr(2.0), &QuadParams::default()).is_err());
    }
}
