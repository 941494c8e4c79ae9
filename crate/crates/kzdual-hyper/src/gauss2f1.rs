//! Independent evaluations of the Gauss hypergeometric function and the
//! integral identity chain connecting them:
//!
//! ```text
//! 1/(2πi) Γ(γ)/(Γ(α)Γ(β)) ∫_{−ε−i∞}^{−ε+i∞} (−x)^s Γ(−s)Γ(s+α)Γ(s+β)/Γ(s+γ) ds
//!   = (1−x)^{γ−α−β} Γ(γ)/(Γ(α)Γ(γ−α)) ∫_1^∞ t^{−β} (t−1)^{α−1} (t−x)^{β−γ} dt
//!   = Γ(γ)/(Γ(α)Γ(γ−α)) ∫_0^1 u^{α−1} (1−u)^{γ−α−1} (1−ux)^{−β} du
//!   = ₂F₁(α, β; γ; x)
//! ```
//!
//! for `Re γ > Re α > 0`, `Re β > 0`, `0 < ε < min(Re α, Re β)`,
//! `|arg(−x)| < π`, `|arg(1−x)| < π`. The middle form follows from the Euler
//! integral by `u = (t−1)/(t−x)`; its integrand exponent on `t` is `−β`
//! (required for convergence exactly when `Re γ > Re α`). The power series is
//! the brute-force oracle.

use kzdual_core::linalg::{c, cr, C64};

use crate::gamma::{gamma, powc};
use crate::quad::{integrate_01, vertical_line};
use crate::{HyperError, Result};

/// Power series Σ (α)_n (β)_n / ((γ)_n n!) x^n; requires |x| < 1.
pub fn f21_series(alpha: C64, beta: C64, gamma_p: C64, x: C64) -> Result<C64> {
    if x.norm() >= 1.0 {
        return Err(HyperError::Region("series requires |x| < 1".into()));
    }
    let mut term = cr(1.0);
    let mut acc = cr(1.0);
    for n in 0..20_000 {
        let nf = cr(n as f64);
        term *= (alpha + nf) * (beta + nf) / ((gamma_p + nf) * (nf + cr(1.0))) * x;
        acc += term;
        if term.norm() < 1e-18 * acc.norm().max(1.0) {
            return Ok(acc);
        }
    }
    Err(HyperError::NonConvergent("series did not converge".into()))
}

fn check_region(alpha: C64, beta: C64, gamma_p: C64, x: C64) -> Result<()> {
    if !(gamma_p.re > alpha.re && alpha.re > 0.0 && beta.re > 0.0) {
        return Err(HyperError::Region(format!(
            "need Re γ > Re α > 0 and Re β > 0, got α={alpha}, β={beta}, γ={gamma_p}"
        )));
    }
    let pi = std::f64::consts::PI;
    if (-x).arg().abs() >= pi || (cr(1.0) - x).arg().abs() >= pi {
        return Err(HyperError::Region("x on the cut [0, ∞)".into()));
    }
    Ok(())
}

/// Euler integral `Γ(γ)/(Γ(α)Γ(γ−α)) ∫_0^1 u^{α−1}(1−u)^{γ−α−1}(1−ux)^{−β} du`.
pub fn f21_euler(alpha: C64, beta: C64, gamma_p: C64, x: C64) -> Result<C64> {
    check_region(alpha, beta, gamma_p, x)?;
    let pre = gamma(gamma_p) / (gamma(alpha) * gamma(gamma_p - alpha));
    let (val, err) = integrate_01(
        |u, um| {
            powc(cr(u), alpha - cr(1.0))
                * powc(cr(um), gamma_p - alpha - cr(1.0))
                * powc(cr(1.0) - cr(u) * x, -beta)
        },
        6,
    );
    if !err.is_finite() {
        return Err(HyperError::NonConvergent("euler integral".into()));
    }
    Ok(pre * val)
}

/// The `∫_1^∞` form, reduced to (0,1) by `t = 1/v`:
/// `(1−x)^{γ−α−β} Γ(γ)/(Γ(α)Γ(γ−α)) ∫_0^1 v^{γ−α−1}(1−v)^{α−1}(1−vx)^{β−γ} dv`.
pub fn f21_euler_infty(alpha: C64, beta: C64, gamma_p: C64, x: C64) -> Result<C64> {
    check_region(alpha, beta, gamma_p, x)?;
    // t = 1/v maps the ray to (0,1): t^{−β}(t−1)^{α−1}(t−x)^{β−γ} dt
    //   = v^{γ−α−1} (1−v)^{α−1} (1−vx)^{β−γ} dv.
    let pre = powc(cr(1.0) - x, gamma_p - alpha - beta) * gamma(gamma_p)
        / (gamma(alpha) * gamma(gamma_p - alpha));
    let (val, err) = integrate_01(
        |v, vm| {
            powc(cr(v), gamma_p - alpha - cr(1.0))
                * powc(cr(vm), alpha - cr(1.0))
                * powc(cr(1.0) - cr(v) * x, beta - gamma_p)
        },
        6,
    );
    if !err.is_finite() {
        return Err(HyperError::NonConvergent("t-form integral".into()));
    }
    Ok(pre * val)
}

/// Mellin–Barnes line `Re s = −ε`, `0 < ε < min(Re α, Re β)`:
/// `1/(2πi) Γ(γ)/(Γ(α)Γ(β)) ∫ (−x)^s Γ(−s)Γ(s+α)Γ(s+β)/Γ(s+γ) ds` (upward).
pub fn f21_mellin_barnes(alpha: C64, beta: C64, gamma_p: C64, x: C64) -> Result<C64> {
    check_region(alpha, beta, gamma_p, x)?;
    let eps = 0.5 * alpha.re.min(beta.re).min(1.0);
    let pi = std::f64::consts::PI;
    let decay = pi - (-x).arg().abs();
    let ln_x = (-x).norm().ln().abs();
    let t_max = (((1.0f64 / 1e-16).ln()) + 10.0 + 2.0 * ln_x) / decay;
    let log_neg_x = (-x).ln();
    let eval = |order: usize, density: f64| -> C64 {
        let nodes = vertical_line(-eps, t_max, t_max, order, density);
        let mut acc = c(0.0, 0.0);
        for n in &nodes {
            let s = n.t;
            acc += n.w
                * (s * log_neg_x).exp()
                * gamma(-s)
                * gamma(s + alpha)
                * gamma(s + beta)
                / gamma(s + gamma_p);
        }
        acc
    };
    let coarse = eval(16, 4.0);
    let fine = eval(16, 8.0);
    if (fine - coarse).norm() > 1e-8 * fine.norm().max(1.0) {
        return Err(HyperError::NonConvergent(format!(
            "MB line refinement moved by {:.3e}",
            (fine - coarse).norm()
        )));
    }
    let pre = gamma(gamma_p) / (gamma(alpha) * gamma(beta)) / c(0.0, 2.0 * pi);
    Ok(pre * fine)
}

/// All four evaluations and their mutual maximum relative deviation.
pub struct F21Comparison {
    pub series: C64,
    pub euler: C64,
    pub euler_infty: C64,
    pub mellin_barnes: C64,
    pub max_rel_deviation: f64,
}

pub fn f21_compare(alpha: C64, beta: C64, gamma_p: C64, x: C64) -> Result<F21Comparison> {
    let series = f21_series(alpha, beta, gamma_p, x)?;
    let euler = f21_euler(alpha, beta, gamma_p, x)?;
    let euler_infty = f21_euler_infty(alpha, beta, gamma_p, x)?;
    let mellin_barnes = f21_mellin_barnes(alpha, beta, gamma_p, x)?;
    let all = [series, euler, euler_infty, mellin_barnes];
    let scale = series.norm().max(1e-300);
    let mut dev = 0.0f64;
    for i in 0..4 {
        for j in (i + 1)..4 {
            dev = dev.max((all[i] - all[j]).norm() / scale);
        }
    }
    Ok(F21Comparison {
        series,
        euler,
        euler_infty,
        mellin_barnes,
        max_rel_deviation: dev,
    })
}
