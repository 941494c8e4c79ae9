//! Complex special-function helpers shared by the integral machinery.

pub use kzdual_core::ops::bseries::gamma;

use kzdual_core::linalg::{cr, C64};

/// `sin(π u / κ)` — the trigonometric kernel used by the q-weight functions
/// and the duality coefficients.
pub fn sink(u: C64, kappa: C64) -> C64 {
    (u * std::f64::consts::PI / kappa).sin()
}

/// Principal-branch power `base^expo = exp(expo · Log base)`.
pub fn powc(base: C64, expo: C64) -> C64 {
    if base.norm() == 0.0 {
        return if expo.norm() == 0.0 { cr(1.0) } else { cr(0.0) };
    }
    (expo * base.ln()).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use kzdual_core::linalg::c;

    #[test]
    fn gamma_against_integral_oracle() {
        // Independent check: with t = e^v, Γ(z) = ∫_{−∞}^{∞} e^{vz − e^v} dv,
        // a smooth rapidly decaying integrand handled by composite
        // Gauss-Legendre.
        let zs = [c(1.0, 1.0), c(2.5, -0.7), c(0.8, 0.3)];
        let (nodes, weights) = crate::quad::gauss_legendre(16);
        for &z in &zs {
            let lo = -40.0 / z.re.min(1.0);
            let hi = 5.0f64;
            let panels = 260usize;
            let mut acc = c(0.0, 0.0);
            for p in 0..panels {
                let a = lo + (hi - lo) * p as f64 / panels as f64;
                let b = lo + (hi - lo) * (p + 1) as f64 / panels as f64;
                for (&x, &w) in nodes.iter().zip(&weights) {
                    let v = 0.5 * (a + b) + 0.5 * (b - a) * x;
                    acc += (z * v - cr(v.exp())).exp() * cr(w * 0.5 * (b - a));
                }
            }
            let g = gamma(z);
            assert!(
                (acc - g).norm() / g.norm() < 1e-12,
                "z = {z}: integral {acc} vs lanczos {g}"
            );
        }
    }

    #[test]
    fn sink_basic() {
        let kappa = cr(2.0);
        assert!((sink(cr(1.0), kappa) - cr(1.0)).norm() < 1e-15);
        assert!(sink(cr(2.0), kappa).norm() < 1e-15);
    }
}
