//! Quadrature-ready contours: nested stadium loops that start at infinity in
//! a prescribed direction, encircle one point, and return (for the loop-chain
//! integrals), and vertical Mellin–Barnes lines.
//!
//! A loop is discretized in traversal order and split at its *anchor*, the
//! leftmost cap excursion, where branch logs are pinned; continuous tracking
//! then walks backward and forward from the anchor.

use kzdual_core::linalg::{c, cr, C64};
use serde::Serialize;

use crate::quad::{discretize, geometric_breaks, refine_breaks, uniform_breaks, Arc, Line, PathNode};
use crate::{HyperError, Result};

/// Geometry of one loop: a stadium around `center`, rays extending to
/// infinity in direction `dir` (radians), half-height `h`, cap radius `rho`,
/// truncated at ray length `r_trunc`.
#[derive(Debug, Clone, Serialize)]
pub struct LoopGeometry {
    pub center: [f64; 2],
    pub dir: f64,
    pub h: f64,
    pub rho: f64,
    pub r_trunc: f64,
}

impl LoopGeometry {
    pub fn center_c(&self) -> C64 {
        c(self.center[0], self.center[1])
    }

    /// The branch anchor: the cap point opposite the rays.
    pub fn anchor(&self) -> C64 {
        self.center_c() - c(self.dir.cos(), self.dir.sin()) * cr(self.rho)
    }
}

/// Vertical line `Re t = re` traversed upward, truncated at `±t_trunc`.
#[derive(Debug, Clone, Serialize)]
pub struct LineGeometry {
    pub re: f64,
    pub t_down: f64,
    pub t_up: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ContourKind {
    /// Loops from +∞ around the points z_i (rational master function).
    GammaLoops,
    /// Loops from ∞·e^{i arg z_i} around z_i (trigonometric master function).
    DeltaLoops,
    /// Product of vertical lines `Re t_a = ε` (q-master function).
    MbPlane,
    /// Nested loops from +∞ around 0 (Selberg integrand).
    SelbergLoops,
    /// Vertical lines `Re s_a = −Re l / 2` (q-Selberg integrand).
    SelbergMb,
}

/// A concrete integration domain for an `r`-fold iterated integral: one loop
/// or line per variable, plus shared quadrature parameters.
#[derive(Debug, Clone, Serialize)]
pub struct ContourSpec {
    pub kind: ContourKind,
    pub loops: Vec<LoopGeometry>,
    pub lines: Vec<LineGeometry>,
    pub quad: QuadParams,
}

#[derive(Debug, Clone, Serialize)]
pub struct QuadParams {
    pub gl_order: usize,
    /// panels on each cap half
    pub cap_panels: usize,
    /// first ray panel length as a multiple of h
    pub ray_first: f64,
    /// geometric growth of ray panels
    pub ray_ratio: f64,
    /// panels per unit length on vertical lines
    pub line_density: f64,
    /// extra halvings of every panel (0 = base, 1 = halved once, …)
    pub refine: u32,
}

impl Default for QuadParams {
    fn default() -> Self {
        QuadParams {
            gl_order: 16,
            cap_panels: 8,
            ray_first: 0.5,
            ray_ratio: 1.6,
            line_density: 4.0,
            refine: 0,
        }
    }
}

impl QuadParams {
    pub fn refined(&self) -> Self {
        let mut q = self.clone();
        q.refine += 1;
        q
    }
}

/// A loop discretized for tracked integration: node chains walking backward
/// and forward from the anchor (weights keep the loop's own orientation).
#[derive(Debug, Clone)]
pub struct TrackedPath {
    pub anchor: C64,
    pub back: Vec<PathNode>,
    pub fwd: Vec<PathNode>,
}

impl TrackedPath {
    pub fn node_count(&self) -> usize {
        self.back.len() + self.fwd.len()
    }
}

fn apply_refine(mut breaks: Vec<f64>, refine: u32) -> Vec<f64> {
    for _ in 0..refine {
        breaks = refine_breaks(&breaks);
    }
    breaks
}

/// Discretize a stadium loop. Traversal order (counterclockwise): incoming
/// upper ray, upper cap half, [anchor], lower cap half, outgoing lower ray.
pub fn tracked_loop(geo: &LoopGeometry, quad: &QuadParams) -> TrackedPath {
    let rot = c(geo.dir.cos(), geo.dir.sin());
    let z = geo.center_c();
    let top_in = Line {
        from: z + rot * c(geo.r_trunc, geo.h),
        to: z + rot * c(0.0, geo.h),
    };
    let cap_upper = Arc {
        center: z,
        rx: geo.rho,
        ry: geo.h,
        th0: std::f64::consts::FRAC_PI_2,
        th1: std::f64::consts::PI,
        dir: geo.dir,
    };
    let cap_lower = Arc {
        center: z,
        rx: geo.rho,
        ry: geo.h,
        th0: std::f64::consts::PI,
        th1: 1.5 * std::f64::consts::PI,
        dir: geo.dir,
    };
    let bottom_out = Line {
        from: z + rot * c(0.0, -geo.h),
        to: z + rot * c(geo.r_trunc, -geo.h),
    };
    // Ray panels grow geometrically away from the cap.
    let w0 = (quad.ray_first * geo.h / geo.r_trunc).min(0.5);
    let ray_breaks = apply_refine(geometric_breaks(w0, quad.ray_ratio), quad.refine);
    let rev_ray_breaks: Vec<f64> = ray_breaks.iter().rev().map(|b| 1.0 - b).collect();
    let cap_breaks = apply_refine(uniform_breaks(quad.cap_panels), quad.refine);

    let seg_top = discretize(&top_in, &rev_ray_breaks, quad.gl_order);
    let seg_cap_up = discretize(&cap_upper, &cap_breaks, quad.gl_order);
    let seg_cap_dn = discretize(&cap_lower, &cap_breaks, quad.gl_order);
    let seg_bottom = discretize(&bottom_out, &ray_breaks, quad.gl_order);

    // Backward chain: from the anchor to the path start (reverse traversal).
    let mut back: Vec<PathNode> = seg_cap_up.into_iter().rev().collect();
    back.extend(seg_top.into_iter().rev());
    let mut fwd = seg_cap_dn;
    fwd.extend(seg_bottom);
    TrackedPath {
        anchor: geo.anchor(),
        back,
        fwd,
    }
}

/// Discretize an upward vertical line (no tracking needed; single-valued
/// integrands). Returned as a TrackedPath with an empty back chain.
pub fn tracked_line(geo: &LineGeometry, quad: &QuadParams) -> TrackedPath {
    let from = c(geo.re, -geo.t_down);
    let to = c(geo.re, geo.t_up);
    let len = geo.t_down + geo.t_up;
    let panels = ((len * quad.line_density).ceil() as usize).max(4) << quad.refine;
    let nodes = discretize(&Line { from, to }, &uniform_breaks(panels), quad.gl_order);
    TrackedPath {
        anchor: from,
        back: Vec::new(),
        fwd: nodes,
    }
}

impl ContourSpec {
    /// Materialize one tracked path per integration variable.
    pub fn paths(&self) -> Vec<TrackedPath> {
        match self.kind {
            ContourKind::MbPlane | ContourKind::SelbergMb => self
                .lines
                .iter()
                .map(|l| tracked_line(l, &self.quad))
                .collect(),
            _ => self
                .loops
                .iter()
                .map(|l| tracked_loop(l, &self.quad))
                .collect(),
        }
    }

    pub fn refined(&self) -> Self {
        let mut s = self.clone();
        s.quad = self.quad.refined();
        s
    }
}

/// Per-variable center assignment for a loop chain `d`: variable
/// `t_{a + d_{<i}}` loops around `z_i`, with the earlier coordinate innermost.
pub fn loop_assignment(d: &[i64]) -> Vec<usize> {
    let mut centers = Vec::new();
    for (i, &di) in d.iter().enumerate() {
        for _ in 0..di {
            centers.push(i + 1);
        }
    }
    centers
}

/// Build the loop chain for the rational master function: `d_i` loops around
/// `z_i`, rays toward +∞, truncated by the decay of `e^{−(λ1−λ2) t/κ}`.
pub fn gamma_loops(
    d: &[i64],
    z: &[C64],
    lambda: (C64, C64),
    kappa: C64,
    quad: QuadParams,
    eps_tail: f64,
) -> Result<ContourSpec> {
    let decay = ((lambda.0 - lambda.1) / kappa).re;
    if decay <= 0.0 {
        return Err(HyperError::Region(format!(
            "Re((λ1−λ2)/κ) = {decay:.3} must be positive for the loop chain"
        )));
    }
    for w in z.windows(2) {
        if w[0].im >= w[1].im {
            return Err(HyperError::Region(
                "imaginary parts of z must be strictly increasing".into(),
            ));
        }
    }
    let assignment = loop_assignment(d);
    let r = assignment.len();
    // Base half-height: below the pairwise scale and every Im gap so that a
    // loop encircles only its own point.
    let mut min_gap = f64::INFINITY;
    for i in 0..z.len() {
        for j in (i + 1)..z.len() {
            min_gap = min_gap.min((z[i] - z[j]).norm());
            min_gap = min_gap.min((z[i].im - z[j].im).abs());
        }
    }
    if !min_gap.is_finite() {
        min_gap = 1.0;
    }
    let growth: f64 = 1.5;
    let h0 = (0.2 * min_gap).min(0.35 * min_gap / growth.powi(r as i32));
    let max_re = z.iter().map(|v| v.re).fold(f64::NEG_INFINITY, f64::max);
    let mut loops = Vec::with_capacity(r);
    let mut per_center = vec![0u32; z.len()];
    for &ci in &assignment {
        let zc = z[ci - 1];
        let lvl = per_center[ci - 1];
        per_center[ci - 1] += 1;
        let h = h0 * growth.powi(lvl as i32);
        let r_trunc = (max_re - zc.re) + ((1.0 / eps_tail).ln() + 8.0) / decay + 2.0;
        loops.push(LoopGeometry {
            center: [zc.re, zc.im],
            dir: 0.0,
            h,
            rho: h,
            r_trunc,
        });
    }
    Ok(ContourSpec {
        kind: ContourKind::GammaLoops,
        loops,
        lines: Vec::new(),
        quad,
    })
}

/// Build the loop chain for the trigonometric master function: loops from
/// infinity in the direction of each z_i. The integrand decays like a power
/// `|t|^{−p}`; `p` must be comfortably above 1.
#[allow(clippy::too_many_arguments)]
pub fn delta_loops(
    d: &[i64],
    z: &[C64],
    tail_power: f64,
    quad: QuadParams,
    eps_tail: f64,
) -> Result<ContourSpec> {
    if tail_power < 1.5 {
        return Err(HyperError::Region(format!(
            "tail decay power {tail_power:.2} too weak for a truncated ray"
        )));
    }
    let args: Vec<f64> = z.iter().map(|v| v.arg()).collect();
    for w in args.windows(2) {
        if w[0] >= w[1] {
            return Err(HyperError::Region(
                "arguments of z must be strictly increasing (counterclockwise order)".into(),
            ));
        }
    }
    if let (Some(first), Some(last)) = (args.first(), args.last()) {
        if last - first >= 2.0 * std::f64::consts::PI {
            return Err(HyperError::Region("arg z range exceeds 2π".into()));
        }
    }
    let assignment = loop_assignment(d);
    let r = assignment.len();
    let mut min_scale = z.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
    for i in 0..z.len() {
        for j in (i + 1)..z.len() {
            min_scale = min_scale.min((z[i] - z[j]).norm());
        }
    }
    let growth: f64 = 1.5;
    let h0 = (0.15 * min_scale).min(0.3 * min_scale / growth.powi(r as i32));
    let mut loops = Vec::with_capacity(r);
    let mut per_center = vec![0u32; z.len()];
    // Truncation from the power tail: |t/z|^{−p} < ε.
    let scale_up = (1.0 / eps_tail).powf(1.0 / tail_power);
    for &ci in &assignment {
        let zc = z[ci - 1];
        let lvl = per_center[ci - 1];
        per_center[ci - 1] += 1;
        loops.push(LoopGeometry {
            center: [zc.re, zc.im],
            dir: zc.arg(),
            h: h0 * growth.powi(lvl as i32),
            rho: h0 * growth.powi(lvl as i32),
            r_trunc: zc.norm() * (scale_up + 1.0),
        });
    }
    Ok(ContourSpec {
        kind: ContourKind::DeltaLoops,
        loops,
        lines: Vec::new(),
        quad,
    })
}

/// Nested Selberg loops around the origin, rays toward +∞, exponential decay
/// rate `Re ν`.
pub fn selberg_loops(m: usize, nu: C64, quad: QuadParams, eps_tail: f64) -> Result<ContourSpec> {
    if nu.re <= 0.0 {
        return Err(HyperError::Region(format!("Re ν = {} must be positive", nu.re)));
    }
    let growth: f64 = 1.6;
    let h0 = 0.25;
    let r_trunc = ((1.0 / eps_tail).ln() + 8.0) / nu.re + 1.0;
    let loops = (0..m)
        .map(|a| LoopGeometry {
            center: [0.0, 0.0],
            dir: 0.0,
            h: h0 * growth.powi(a as i32),
            rho: h0 * growth.powi(a as i32),
            r_trunc,
        })
        .collect();
    Ok(ContourSpec {
        kind: ContourKind::SelbergLoops,
        loops,
        lines: Vec::new(),
        quad,
    })
}

/// Product of vertical lines `Re t_a = ε` for the q-master integrand. The
/// offset must satisfy `0 < ε < min(−Re l_i)`; `decay_up`/`decay_down` are
/// the exponential decay rates toward `±i∞`.
pub fn mb_plane(
    r: usize,
    eps: f64,
    l: &[C64],
    decay_up: f64,
    decay_down: f64,
    quad: QuadParams,
    eps_tail: f64,
) -> Result<ContourSpec> {
    let bound = l.iter().map(|v| -v.re).fold(f64::INFINITY, f64::min);
    if !(eps > 0.0 && eps < bound) {
        return Err(HyperError::Region(format!(
            "offset ε = {eps} outside (0, {bound:.3}) = (0, min(−Re l_i))"
        )));
    }
    if decay_up <= 0.0 || decay_down <= 0.0 {
        return Err(HyperError::Region(
            "integrand does not decay on the vertical line".into(),
        ));
    }
    let t_up = ((1.0 / eps_tail).ln() + 10.0) / decay_up;
    let t_down = ((1.0 / eps_tail).ln() + 10.0) / decay_down;
    let lines = (0..r)
        .map(|_| LineGeometry { re: eps, t_down, t_up })
        .collect();
    Ok(ContourSpec {
        kind: ContourKind::MbPlane,
        loops: Vec::new(),
        lines,
        quad,
    })
}

/// Vertical lines `Re s_a = −Re l / 2` for the q-Selberg integrand.
pub fn selberg_mb(
    m: usize,
    l: C64,
    x: C64,
    kappa: C64,
    quad: QuadParams,
    eps_tail: f64,
) -> Result<ContourSpec> {
    if kappa.im.abs() > 1e-12 || kappa.re <= 0.0 {
        return Err(HyperError::Region("κ must be real positive".into()));
    }
    if l.re >= 0.0 {
        return Err(HyperError::Region(
            "Re l must be negative in the continued region".into(),
        ));
    }
    let neg_x = -x;
    let arg = neg_x.arg();
    if !(arg > -std::f64::consts::PI && arg < std::f64::consts::PI) || neg_x.norm() == 0.0 {
        return Err(HyperError::Region("arg(−x) must lie in (−π, π)".into()));
    }
    // Decay of Γ(s)Γ(−s−l/κ)(−x)^s on Re s = const: e^{−(π ∓ arg(−x))|Im s|}
    // up to the |x|^{Re s} constant and polynomial factors.
    let ln_ratio = neg_x.norm().ln().abs();
    let decay_up = std::f64::consts::PI - arg;
    let decay_down = std::f64::consts::PI + arg;
    if decay_up <= 0.1 || decay_down <= 0.1 {
        return Err(HyperError::Region("x too close to the cut for decay".into()));
    }
    let t = ((1.0 / eps_tail).ln() + 12.0 + 2.0 * ln_ratio) / decay_up.min(decay_down);
    let lines = (0..m)
        .map(|_| LineGeometry {
            re: -l.re / 2.0,
            t_down: t,
            t_up: t,
        })
        .collect();
    Ok(ContourSpec {
        kind: ContourKind::SelbergMb,
        loops: Vec::new(),
        lines,
        quad,
    })
}
