//! Quadrature primitives: Gauss–Legendre nodes, tanh-sinh (double
//! exponential) rules for endpoint-singular integrals on (0, 1), and vertical
//! Mellin–Barnes lines with refinement-based error estimates.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use kzdual_core::linalg::{c, cr, C64};

/// Gauss–Legendre nodes and weights on [−1, 1], computed by Newton iteration
/// on the Legendre recurrence and cached per order.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    static CACHE: OnceLock<Mutex<HashMap<usize, (Vec<f64>, Vec<f64>)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().unwrap().get(&order) {
        return hit.clone();
    }
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Chebyshev-like initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    cache.lock().unwrap().insert(order, (nodes.clone(), weights.clone()));
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0f64;
    let mut p1 = x;
    for j in 2..=n {
        let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// One smooth curve piece `τ ∈ [0,1] ↦ (point, velocity)`.
pub trait Curve {
    fn at(&self, tau: f64) -> (C64, C64);
}

/// Straight segment.
pub struct Line {
    pub from: C64,
    pub to: C64,
}

impl Curve for Line {
    fn at(&self, tau: f64) -> (C64, C64) {
        (self.from + (self.to - self.from) * cr(tau), self.to - self.from)
    }
}

/// Elliptical arc `center + rx cos θ + i ry sin θ`, θ from `th0` to `th1`,
/// rotated by `e^{i dir}` about the center.
pub struct Arc {
    pub center: C64,
    pub rx: f64,
    pub ry: f64,
    pub th0: f64,
    pub th1: f64,
    pub dir: f64,
}

impl Curve for Arc {
    fn at(&self, tau: f64) -> (C64, C64) {
        let th = self.th0 + (self.th1 - self.th0) * tau;
        let rot = c(self.dir.cos(), self.dir.sin());
        let p = c(self.rx * th.cos(), self.ry * th.sin());
        let v = c(-self.rx * th.sin(), self.ry * th.cos()) * cr(self.th1 - self.th0);
        (self.center + rot * p, rot * v)
    }
}

/// A quadrature node with its `dt` weight.
#[derive(Debug, Clone, Copy)]
pub struct PathNode {
    pub t: C64,
    pub w: C64,
}

/// Discretize a curve into panels × Gauss-Legendre nodes. `breaks` are the
/// panel boundaries in [0, 1] (must start at 0 and end at 1).
pub fn discretize(curve: &dyn Curve, breaks: &[f64], order: usize) -> Vec<PathNode> {
    let (xs, ws) = gauss_legendre(order);
    let mut out = Vec::with_capacity((breaks.len() - 1) * order);
    for win in breaks.windows(2) {
        let (a, b) = (win[0], win[1]);
        for (&x, &w) in xs.iter().zip(&ws) {
            let tau = 0.5 * (a + b) + 0.5 * (b - a) * x;
            let (p, v) = curve.at(tau);
            out.push(PathNode {
                t: p,
                w: v * cr(0.5 * (b - a) * w),
            });
        }
    }
    out
}

/// Insert midpoints into a break list (panel halving, for error estimates).
pub fn refine_breaks(breaks: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(breaks.len() * 2 - 1);
    for win in breaks.windows(2) {
        out.push(win[0]);
        out.push(0.5 * (win[0] + win[1]));
    }
    out.push(*breaks.last().unwrap());
    out
}

/// Uniform break list with `p` panels.
pub fn uniform_breaks(p: usize) -> Vec<f64> {
    (0..=p).map(|i| i as f64 / p as f64).collect()
}

/// Geometric break list: first panel width `w0` (as a fraction), growing by
/// `ratio` until 1 is covered.
pub fn geometric_breaks(w0: f64, ratio: f64) -> Vec<f64> {
    let mut out = vec![0.0];
    let mut x = 0.0f64;
    let mut w = w0;
    while x + w < 1.0 {
        x += w;
        out.push(x);
        w *= ratio;
    }
    out.push(1.0);
    out
}

/// tanh-sinh nodes for ∫_0^1 f(u) du with integrable endpoint singularities.
/// Returns `(u, 1−u, weight)` triples with both endpoint distances computed
/// cancellation-free; `level` halvings of the base step.
pub fn tanh_sinh_01(level: u32) -> Vec<(f64, f64, f64)> {
    let h = 1.0 / f64::from(1u32 << level);
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut out = Vec::new();
    let kmax = (4.0 / h) as i64;
    for k in -kmax..=kmax {
        let t = k as f64 * h;
        let s = half_pi * t.sinh();
        // u = (1 + tanh s)/2 = 1/(1 + e^{−2s}); 1−u = 1/(1 + e^{2s}).
        let u = 1.0 / (1.0 + (-2.0 * s).exp());
        let um = 1.0 / (1.0 + (2.0 * s).exp());
        let du = 0.5 * half_pi * t.cosh() / s.cosh().powi(2);
        let w = du * h;
        if u > 0.0 && um > 0.0 && w.is_finite() && w > 1e-300 {
            out.push((u, um, w));
        }
    }
    out
}

/// ∫_0^1 f(u, 1−u) du by tanh-sinh with an error estimate from one
/// refinement step.
pub fn integrate_01<F: Fn(f64, f64) -> C64>(f: F, level: u32) -> (C64, f64) {
    let coarse: C64 = tanh_sinh_01(level)
        .into_iter()
        .map(|(u, um, w)| f(u, um) * cr(w))
        .sum();
    let fine: C64 = tanh_sinh_01(level + 1)
        .into_iter()
        .map(|(u, um, w)| f(u, um) * cr(w))
        .sum();
    let err = 2.0 * (fine - coarse).norm() + 1e-15 * fine.norm();
    (fine, err)
}

/// Nodes of an upward vertical line `Re t = re`, `Im t ∈ [−t_down, t_up]`,
/// split into unit-width panels.
pub fn vertical_line(re: f64, t_down: f64, t_up: f64, order: usize, panels_per_unit: f64) -> Vec<PathNode> {
    let from = c(re, -t_down);
    let to = c(re, t_up);
    let len = t_up + t_down;
    let panels = (len * panels_per_unit).ceil().max(4.0) as usize;
    discretize(&Line { from, to }, &uniform_breaks(panels), order)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_integrates_polynomials_exactly() {
        let (xs, ws) = gauss_legendre(8);
        // ∫_{-1}^{1} x^10 dx = 2/11 needs order ≥ 6.
        let got: f64 = xs.iter().zip(&ws).map(|(&x, &w)| x.powi(10) * w).sum();
        assert!((got - 2.0 / 11.0).abs() < 1e-14);
    }

    #[test]
    fn circle_winding() {
        // ∮ dz/z around the unit circle = 2πi.
        let arc = Arc {
            center: cr(0.0),
            rx: 1.0,
            ry: 1.0,
            th0: 0.0,
            th1: 2.0 * std::f64::consts::PI,
            dir: 0.0,
        };
        let nodes = discretize(&arc, &uniform_breaks(8), 16);
        let got: C64 = nodes.iter().map(|n| n.w / n.t).sum();
        assert!((got - c(0.0, 2.0 * std::f64::consts::PI)).norm() < 1e-12);
    }

    #[test]
    fn tanh_sinh_integrable_singularity() {
        // ∫_0^1 u^{-1/2} du = 2.
        let (v, err) = integrate_01(|u, _| cr(u.powf(-0.5)), 5);
        assert!((v - cr(2.0)).norm() < 1e-12, "got {v}, err {err}");
        // ∫_0^1 u^{-0.3}(1-u)^{-0.4} du = B(0.7, 0.6).
        let (v, _) = integrate_01(|u, um| cr(u.powf(-0.3) * um.powf(-0.4)), 6);
        let beta = crate::gamma::gamma(cr(0.7)) * crate::gamma::gamma(cr(0.6))
            / crate::gamma::gamma(cr(1.3));
        assert!((v - beta).norm() < 1e-11);
    }

    #[test]
    fn refinement_bounds_change() {
        let arc = Arc {
            center: cr(0.0),
            rx: 1.0,
            ry: 0.5,
            th0: 0.0,
            th1: std::f64::consts::PI,
            dir: 0.3,
        };
        let breaks = uniform_breaks(6);
        let coarse: C64 = discretize(&arc, &breaks, 12)
            .iter()
            .map(|n| n.w * (n.t * n.t))
            .sum();
        let fine: C64 = discretize(&arc, &refine_breaks(&breaks), 12)
            .iter()
            .map(|n| n.w * (n.t * n.t))
            .sum();
        assert!((coarse - fine).norm() < 1e-12);
    }
}
