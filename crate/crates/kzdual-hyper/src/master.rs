//! Master functions and the branch-tracked nested quadrature engine.
//!
//! The multivalued part of every loop integrand is a product of powers of
//! the primitive factors `t_a − z_i`, `t_a − t_b`, `t_a`, `−t_a`. Each factor
//! carries a continuously tracked logarithm `L`, pinned at the contour's
//! anchor configuration by explicit argument windows; the integrand is
//! `prefactor · exp(Σ_f exponent_f L_f + Σ_a linear_a t_a) · smooth(t)`,
//! where `smooth` is a single-valued vector factor (the weight functions).
//!
//! Tracking on a product of loops walks one variable at a time: while an
//! outer variable moves, the logs of its pairings with the *anchors* of the
//! still-pending inner variables are advanced, so each inner sweep starts
//! from a continuously reached determination.

use kzdual_core::linalg::{cr, C64};

use crate::contour::TrackedPath;
use crate::gamma::gamma;
use crate::{HyperError, Result};

/// Largest admissible argument step between adjacent quadrature nodes.
pub const PHASE_JUMP_GUARD: f64 = 2.9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FactorKind {
    /// `t_var − c`
    VarMinusConst { var: usize, c: C64 },
    /// `c − t_var`
    ConstMinusVar { var: usize, c: C64 },
    /// `t_var`
    Var { var: usize },
    /// `t_a − t_b` with `a < b`
    VarMinusVar { a: usize, b: usize },
}

impl FactorKind {
    fn involves(&self, j: usize) -> bool {
        match *self {
            FactorKind::VarMinusConst { var, .. }
            | FactorKind::ConstMinusVar { var, .. }
            | FactorKind::Var { var } => var == j,
            FactorKind::VarMinusVar { a, b } => a == j || b == j,
        }
    }

    /// Value of the underlying linear expression with `t_j` replaced by `t`
    /// and all other variables read from `ts`.
    fn value_at(&self, j: usize, t: C64, ts: &[C64]) -> C64 {
        match *self {
            FactorKind::VarMinusConst { var, c } => {
                debug_assert_eq!(var, j);
                t - c
            }
            FactorKind::ConstMinusVar { var, c } => {
                debug_assert_eq!(var, j);
                c - t
            }
            FactorKind::Var { var } => {
                debug_assert_eq!(var, j);
                t
            }
            FactorKind::VarMinusVar { a, b } => {
                if j == a {
                    t - ts[b]
                } else {
                    ts[a] - t
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TrackedFactor {
    pub kind: FactorKind,
    /// The tracked log enters the amplitude as `exp(exponent · L)`.
    pub exponent: C64,
}

/// The tracked multivalued amplitude of an iterated loop integral.
pub struct NestedIntegrand<'a> {
    pub factors: Vec<TrackedFactor>,
    /// Log of each factor at the all-anchors configuration.
    pub anchor_logs: Vec<C64>,
    /// Coefficients of `exp(Σ linear_a t_a)`.
    pub linear: Vec<C64>,
    /// Constant prefactor.
    pub prefactor: C64,
    /// Single-valued vector factor.
    pub smooth: Box<dyn Fn(&[C64]) -> Vec<C64> + 'a>,
    pub dim: usize,
}

struct Sweeper<'a, 'b> {
    paths: &'a [TrackedPath],
    integrand: &'a NestedIntegrand<'b>,
    ts: Vec<C64>,
    logs: Vec<C64>,
    out: Vec<C64>,
    jump_guard_hit: bool,
}

impl<'a, 'b> Sweeper<'a, 'b> {
    fn evaluate_leaf(&mut self, weight: C64) {
        let mut expo = C64::new(0.0, 0.0);
        for (f, &l) in self.integrand.factors.iter().zip(&self.logs) {
            expo += f.exponent * l;
        }
        for (a, &c) in self.integrand.linear.iter().enumerate() {
            expo += c * self.ts[a];
        }
        let amp = self.integrand.prefactor * expo.exp() * weight;
        let vals = (self.integrand.smooth)(&self.ts);
        debug_assert_eq!(vals.len(), self.integrand.dim);
        for (o, v) in self.out.iter_mut().zip(vals) {
            *o += amp * v;
        }
    }

    fn sweep(&mut self, j: usize, weight: C64) {
        let affected: Vec<usize> = self
            .integrand
            .factors
            .iter()
            .enumerate()
            .filter(|(_, f)| f.kind.involves(j))
            .map(|(i, _)| i)
            .collect();
        let saved_logs: Vec<C64> = affected.iter().map(|&i| self.logs[i]).collect();
        let anchor = self.paths[j].anchor;
        let saved_t = self.ts[j];
        let chains: [&[crate::quad::PathNode]; 2] = [&self.paths[j].back, &self.paths[j].fwd];
        for chain in chains {
            // Reset to the anchor state at the start of each chain.
            for (&i, &v) in affected.iter().zip(&saved_logs) {
                self.logs[i] = v;
            }
            self.ts[j] = anchor;
            let mut prev = anchor;
            for node in chain {
                for &i in &affected {
                    let kind = self.integrand.factors[i].kind;
                    let old = kind.value_at(j, prev, &self.ts);
                    let new = kind.value_at(j, node.t, &self.ts);
                    let step = (new / old).ln();
                    if step.im.abs() > PHASE_JUMP_GUARD {
                        self.jump_guard_hit = true;
                    }
                    self.logs[i] += step;
                }
                self.ts[j] = node.t;
                prev = node.t;
                if j == 0 {
                    self.evaluate_leaf(weight * node.w);
                } else {
                    self.sweep(j - 1, weight * node.w);
                }
            }
        }
        for (&i, &v) in affected.iter().zip(&saved_logs) {
            self.logs[i] = v;
        }
        self.ts[j] = saved_t;
    }
}

/// Evaluate the iterated integral of a tracked integrand over a product of
/// loops/lines (one path per variable). Zero variables: the integrand value
/// itself.
pub fn integrate_nested(paths: &[TrackedPath], integrand: &NestedIntegrand) -> Result<Vec<C64>> {
    let r = paths.len();
    debug_assert_eq!(r, integrand.linear.len());
    if r == 0 {
        let vals = (integrand.smooth)(&[]);
        return Ok(vals.into_iter().map(|v| v * integrand.prefactor).collect());
    }
    let mut sweeper = Sweeper {
        paths,
        integrand,
        ts: paths.iter().map(|p| p.anchor).collect(),
        logs: integrand.anchor_logs.clone(),
        out: vec![C64::new(0.0, 0.0); integrand.dim],
        jump_guard_hit: false,
    };
    sweeper.sweep(r - 1, cr(1.0));
    if sweeper.jump_guard_hit {
        return Err(HyperError::Branch(format!(
            "phase step above {PHASE_JUMP_GUARD} between adjacent nodes; refine the panels"
        )));
    }
    Ok(sweeper.out)
}

// ---------------------------------------------------------------------------
// Argument windows
// ---------------------------------------------------------------------------

/// Shift `theta` by multiples of 2π into the half-open window `(lo, hi]`.
/// The window must have length 2π.
pub fn wrap_into(theta: f64, lo: f64, hi: f64) -> f64 {
    debug_assert!((hi - lo - 2.0 * std::f64::consts::PI).abs() < 1e-12);
    let tau = 2.0 * std::f64::consts::PI;
    let mut th = theta;
    while th > hi {
        th -= tau;
    }
    while th <= lo {
        th += tau;
    }
    th
}

/// Log with argument wrapped into `(lo, hi]`.
pub fn log_in_window(v: C64, lo: f64, hi: f64) -> C64 {
    C64::new(v.norm().ln(), wrap_into(v.arg(), lo, hi))
}

const PI: f64 = std::f64::consts::PI;

// ---------------------------------------------------------------------------
// Master functions
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MasterFlavor {
    Rational,
    Trig,
    QMaster,
}

/// Data of a master function for the `gl_2` chain: `n` points `z`, the pair
/// `(λ_1, λ_2)`, weights `l` (only `l_1` may be complex), `(m_1, m_2)`, and κ.
#[derive(Debug, Clone)]
pub struct MasterFunctionSpec {
    pub flavor: MasterFlavor,
    pub r: usize,
    pub z: Vec<C64>,
    pub lambda: (C64, C64),
    pub l: Vec<C64>,
    pub m: (C64, C64),
    pub kappa: C64,
}

/// The tracked factor system of `Φ_r^{1/κ}` (rational flavor) for loops with
/// the given anchors and center assignment. Returns `(factors, anchor_logs,
/// linear, prefactor)`.
pub fn rational_master_parts(
    spec: &MasterFunctionSpec,
    anchors: &[C64],
) -> Result<(Vec<TrackedFactor>, Vec<C64>, Vec<C64>, C64)> {
    let r = spec.r;
    let n = spec.z.len();
    let kappa = spec.kappa;
    let (l1, l2) = spec.lambda;
    let mut factors = Vec::new();
    let mut anchor_logs = Vec::new();
    for a in 0..r {
        for (i, &zi) in spec.z.iter().enumerate() {
            factors.push(TrackedFactor {
                kind: FactorKind::VarMinusConst { var: a, c: zi },
                exponent: -spec.l[i] / kappa,
            });
            anchor_logs.push(log_in_window(anchors[a] - zi, -2.0 * PI, 0.0));
        }
    }
    for a in 0..r {
        for b in (a + 1)..r {
            factors.push(TrackedFactor {
                kind: FactorKind::VarMinusVar { a, b },
                exponent: cr(2.0) / kappa,
            });
            let v = anchors[a] - anchors[b];
            let theta = v.arg();
            if theta > 1e-9 {
                return Err(HyperError::Branch(format!(
                    "anchor separation t_{}−t_{} has arg {theta:.3} outside (−π, 0]",
                    a + 1,
                    b + 1
                )));
            }
            anchor_logs.push(C64::new(v.norm().ln(), theta.min(0.0)));
        }
    }
    // exp(λ1 Σ l_i z_i / κ) (λ1−λ2)^{−r/κ} ∏_{i<j} (z_i−z_j)^{l_i l_j/κ}
    let mut logpre = C64::new(0.0, 0.0);
    for (i, &zi) in spec.z.iter().enumerate() {
        logpre += l1 * spec.l[i] * zi / kappa;
    }
    logpre += (-cr(r as f64) / kappa) * (l1 - l2).ln();
    for i in 0..n {
        for j in (i + 1)..n {
            logpre += (spec.l[i] * spec.l[j] / kappa) * log_in_window(spec.z[i] - spec.z[j], -PI, PI);
        }
    }
    let linear = vec![-(l1 - l2) / kappa; r];
    Ok((factors, anchor_logs, linear, logpre.exp()))
}

/// The tracked factor system of `Ψ_r^{1/κ}` (trigonometric flavor). Anchor
/// arguments follow the loop directions: `arg t_a` is pinned to `arg z_{c(a)}`
/// and every other window is taken relative to it.
pub fn trig_master_parts(
    spec: &MasterFunctionSpec,
    anchors: &[C64],
    centers: &[usize],
) -> Result<(Vec<TrackedFactor>, Vec<C64>, Vec<C64>, C64)> {
    let r = spec.r;
    let n = spec.z.len();
    let kappa = spec.kappa;
    let (l1, l2) = spec.lambda;
    let (m1, m2) = spec.m;
    let args: Vec<f64> = spec.z.iter().map(|v| v.arg()).collect();
    let mut factors = Vec::new();
    let mut anchor_logs = Vec::new();
    // t_a^{(λ2−λ1+m1−m2+1)/κ}
    for a in 0..r {
        factors.push(TrackedFactor {
            kind: FactorKind::Var { var: a },
            exponent: (l2 - l1 + m1 - m2 + cr(1.0)) / kappa,
        });
        anchor_logs.push(C64::new(anchors[a].norm().ln(), args[centers[a] - 1]));
    }
    for a in 0..r {
        for (i, &zi) in spec.z.iter().enumerate() {
            factors.push(TrackedFactor {
                kind: FactorKind::VarMinusConst { var: a, c: zi },
                exponent: -spec.l[i] / kappa,
            });
            let th = args[i] + wrap_into((anchors[a] - zi).arg() - args[i], -2.0 * PI, 0.0);
            anchor_logs.push(C64::new((anchors[a] - zi).norm().ln(), th));
        }
    }
    for a in 0..r {
        for b in (a + 1)..r {
            factors.push(TrackedFactor {
                kind: FactorKind::VarMinusVar { a, b },
                exponent: cr(2.0) / kappa,
            });
            let ta = args[centers[a] - 1];
            let th = ta + wrap_into((anchors[a] - anchors[b]).arg() - ta, -PI, PI);
            anchor_logs.push(C64::new((anchors[a] - anchors[b]).norm().ln(), th));
        }
    }
    // ∏ z_i^{l_i(λ1−m1+l_i/2)/κ} ∏_{i<j} (z_i−z_j)^{l_i l_j/κ}
    let mut logpre = C64::new(0.0, 0.0);
    for (i, &zi) in spec.z.iter().enumerate() {
        let lz = C64::new(zi.norm().ln(), args[i]);
        logpre += (spec.l[i] * (l1 - m1 + spec.l[i] / cr(2.0)) / kappa) * lz;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let th = args[i] + wrap_into((spec.z[i] - spec.z[j]).arg() - args[i], -PI, PI);
            let lz = C64::new((spec.z[i] - spec.z[j]).norm().ln(), th);
            logpre += (spec.l[i] * spec.l[j] / kappa) * lz;
        }
    }
    let linear = vec![C64::new(0.0, 0.0); r];
    Ok((factors, anchor_logs, linear, logpre.exp()))
}

/// Direct (non-tracked) value of the master function's κ-th root at a point,
/// with every argument window applied at the point itself. Exact for the
/// single-valued q-master; for the loop flavors it agrees with the tracked
/// determination on the window's sheet.
pub fn master_value(spec: &MasterFunctionSpec, t: &[C64]) -> Result<C64> {
    if t.len() != spec.r {
        return Err(HyperError::Region(format!(
            "expected {} integration variables, got {}",
            spec.r,
            t.len()
        )));
    }
    for (a, &ta) in t.iter().enumerate() {
        for (i, &zi) in spec.z.iter().enumerate() {
            if (ta - zi).norm() < 1e-12 {
                return Err(HyperError::Singular(format!("t_{} = z_{}", a + 1, i + 1)));
            }
        }
        for (b, &tb) in t.iter().enumerate().skip(a + 1) {
            if (ta - tb).norm() < 1e-12 {
                return Err(HyperError::Singular(format!("t_{} = t_{}", a + 1, b + 1)));
            }
        }
    }
    let kappa = spec.kappa;
    let (l1, l2) = spec.lambda;
    match spec.flavor {
        MasterFlavor::Rational => {
            let mut logv = C64::new(0.0, 0.0);
            for (i, &zi) in spec.z.iter().enumerate() {
                logv += l1 * spec.l[i] * zi / kappa;
            }
            for &ta in t {
                logv -= (l1 - l2) * ta / kappa;
            }
            logv -= cr(spec.r as f64) / kappa * (l1 - l2).ln();
            for i in 0..spec.z.len() {
                for j in (i + 1)..spec.z.len() {
                    logv += spec.l[i] * spec.l[j] / kappa
                        * log_in_window(spec.z[i] - spec.z[j], -PI, PI);
                }
            }
            for &ta in t {
                for (i, &zi) in spec.z.iter().enumerate() {
                    logv -= spec.l[i] / kappa * log_in_window(ta - zi, -2.0 * PI, 0.0);
                }
            }
            for a in 0..spec.r {
                for b in (a + 1)..spec.r {
                    logv += cr(2.0) / kappa * log_in_window(t[a] - t[b], -PI, PI);
                }
            }
            Ok(logv.exp())
        }
        MasterFlavor::Trig => {
            let (m1, m2) = spec.m;
            let mut logv = C64::new(0.0, 0.0);
            for (i, &zi) in spec.z.iter().enumerate() {
                logv += spec.l[i] * (l1 - m1 + spec.l[i] / cr(2.0)) / kappa * zi.ln();
            }
            for i in 0..spec.z.len() {
                for j in (i + 1)..spec.z.len() {
                    logv += spec.l[i] * spec.l[j] / kappa * (spec.z[i] - spec.z[j]).ln();
                }
            }
            for &ta in t {
                logv += (l2 - l1 + m1 - m2 + cr(1.0)) / kappa * ta.ln();
                for (i, &zi) in spec.z.iter().enumerate() {
                    logv -= spec.l[i] / kappa * (ta - zi).ln();
                }
            }
            for a in 0..spec.r {
                for b in (a + 1)..spec.r {
                    logv += cr(2.0) / kappa * (t[a] - t[b]).ln();
                }
            }
            Ok(logv.exp())
        }
        MasterFlavor::QMaster => Ok(q_master_value(spec, t)),
    }
}

/// The q-master function: Gamma-ratio products times λ-powers, single-valued
/// once `0 < arg(λ2/λ1) < 2π` is fixed.
pub fn q_master_value(spec: &MasterFunctionSpec, t: &[C64]) -> C64 {
    let kappa = spec.kappa;
    let (l1, l2) = spec.lambda;
    let r = cr(spec.r as f64);
    let sum_t: C64 = t.iter().sum();
    // λ1^{(r/2 + Σ(z_i l_i − l_i²/2) − Σt)/κ} λ2^{(r/2 + Σt)/κ} (λ1−λ2)^{−r/κ}
    // with the t-dependence through (λ2/λ1)^{Σt/κ}, arg(λ2/λ1) ∈ (0, 2π).
    let mut zl = C64::new(0.0, 0.0);
    for (i, &zi) in spec.z.iter().enumerate() {
        zl += zi * spec.l[i] - spec.l[i] * spec.l[i] / cr(2.0);
    }
    let log_l1 = l1.ln();
    let log_ratio = log_in_window(l2 / l1, 0.0, 2.0 * PI);
    let mut logv = (r / cr(2.0) + zl - sum_t) / kappa * log_l1
        + (r / cr(2.0) + sum_t) / kappa * (log_l1 + log_ratio)
        - r / kappa * (l1 - l2).ln();
    let mut value = logv.exp();
    logv = C64::new(0.0, 0.0);
    let _ = logv;
    for &ta in t {
        for (i, &zi) in spec.z.iter().enumerate() {
            value *= gamma((ta - zi) / kappa) / gamma((ta - zi + spec.l[i]) / kappa);
        }
    }
    for a in 0..spec.r {
        for b in (a + 1)..spec.r {
            value *= gamma((t[a] - t[b] + cr(1.0)) / kappa)
                / gamma((t[a] - t[b] - cr(1.0)) / kappa);
        }
    }
    value
}

/// The plain master function (no κ-th root): a single-valued rational ×
/// exponential expression when the weights are integers; used as the
/// symmetry oracle.
pub fn master_plain(spec: &MasterFunctionSpec, t: &[C64]) -> C64 {
    let (l1, l2) = spec.lambda;
    match spec.flavor {
        MasterFlavor::Rational => {
            let mut v = C64::new(0.0, 0.0);
            for (i, &zi) in spec.z.iter().enumerate() {
                v += l1 * spec.l[i] * zi;
            }
            for &ta in t {
                v -= (l1 - l2) * ta;
            }
            let mut value = v.exp() * (l1 - l2).powc(-cr(spec.r as f64));
            for i in 0..spec.z.len() {
                for j in (i + 1)..spec.z.len() {
                    value *= (spec.z[i] - spec.z[j]).powc(spec.l[i] * spec.l[j]);
                }
            }
            for &ta in t {
                for (i, &zi) in spec.z.iter().enumerate() {
                    value *= (ta - zi).powc(-spec.l[i]);
                }
            }
            for a in 0..spec.r {
                for b in (a + 1)..spec.r {
                    let d = t[a] - t[b];
                    value *= d * d;
                }
            }
            value
        }
        _ => unimplemented!("plain form used as an oracle only for the rational flavor"),
    }
}
