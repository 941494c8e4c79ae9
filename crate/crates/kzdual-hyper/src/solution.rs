//! The integral solutions on `gl_2` weight spaces: the rational loop-chain
//! integral `U_d`, the trigonometric loop-chain integral `Ũ_d`, and the
//! Mellin–Barnes integral `Û_d`, each returning a coordinate vector over the
//! lattice `{d : Σ d_i = m_2, d_i ≤ l_i for integer l_i}` with a
//! refinement-based error estimate.
//!
//! The Mellin–Barnes plane is anchored at the rightmost `Re z_i` with offset
//! `Re t = max Re z + ε_t`: for parameters continued out of the reference
//! region (`Re z_i` equal, `Re l_i < 0`), the anchored plane keeps every
//! integrand pole on the side it started; ladder poles attached to integer
//! weights are cancelled by zeros of the Gamma-ratio factors.

use kzdual_core::glk::{as_nonneg_int, enumerate_basis};
use kzdual_core::linalg::{cr, C64};
use serde_json::json;

use crate::contour::{delta_loops, gamma_loops, loop_assignment, mb_plane, ContourSpec, QuadParams};
use crate::master::{
    integrate_nested, q_master_value, rational_master_parts, trig_master_parts, MasterFlavor,
    MasterFunctionSpec, NestedIntegrand,
};
use crate::weights::{w_rational, w_shifted, w_trig};
use crate::{HyperError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolutionKind {
    /// Loop-chain integral of the rational master function.
    Rational,
    /// Loop-chain integral of the trigonometric master function.
    Trig,
    /// Mellin–Barnes integral of the q-master function.
    QMellinBarnes,
}

/// Parameters shared by all three solution families (`gl_2`, `n` points).
#[derive(Debug, Clone)]
pub struct SolutionParams {
    pub z: Vec<C64>,
    pub lambda: (C64, C64),
    pub l: Vec<C64>,
    pub m: (C64, C64),
    pub kappa: C64,
}

impl SolutionParams {
    pub fn master_spec(&self, flavor: MasterFlavor, r: usize) -> MasterFunctionSpec {
        MasterFunctionSpec {
            flavor,
            r,
            z: self.z.clone(),
            lambda: self.lambda,
            l: self.l.clone(),
            m: self.m,
            kappa: self.kappa,
        }
    }
}

/// A complex coordinate vector produced by quadrature.
#[derive(Debug, Clone)]
pub struct SolutionVector {
    pub values: Vec<C64>,
    pub abs_err: Vec<f64>,
    /// The lattice elements indexing the coordinates, in the frozen order.
    pub basis: Vec<Vec<i64>>,
    pub metadata: serde_json::Value,
}

impl SolutionVector {
    /// Coordinate at a given lattice element.
    pub fn coordinate(&self, d: &[i64]) -> Option<C64> {
        self.basis.iter().position(|b| b == d).map(|i| self.values[i])
    }
}

/// The lattice `{d ∈ Z≥0^n : Σ d_i = m_2, d_i ≤ l_i when l_i ∈ Z≥0}` in the
/// frozen basis order of the underlying weight space.
pub fn solution_lattice(l: &[C64], m: (C64, C64)) -> Result<Vec<Vec<i64>>> {
    let space = enumerate_basis(2, l.len(), l, &[m.0, m.1])
        .map_err(HyperError::Core)?;
    Ok((0..space.dim())
        .map(|idx| (1..=l.len()).map(|i| space.entry_int(idx, 2, i)).collect())
        .collect())
}

fn m2_of(m: (C64, C64)) -> Result<usize> {
    as_nonneg_int(m.1)
        .map(|v| v as usize)
        .ok_or_else(|| HyperError::Region("m_2 must be a nonnegative integer".into()))
}

fn check_d(d: &[i64], params: &SolutionParams, m2: usize) -> Result<()> {
    if d.len() != params.z.len() || d.iter().any(|&v| v < 0) {
        return Err(HyperError::Region("d must be a nonnegative n-vector".into()));
    }
    if d.iter().sum::<i64>() as usize != m2 {
        return Err(HyperError::Region(format!("Σd must equal m_2 = {m2}")));
    }
    for (i, &di) in d.iter().enumerate() {
        if let Some(li) = as_nonneg_int(params.l[i]) {
            if di > li {
                return Err(HyperError::Region(format!("d_{} exceeds integer l_{}", i + 1, i + 1)));
            }
        }
    }
    Ok(())
}

/// Evaluate one solution family on its contour for the lattice element `d`.
pub fn integrate_solution(
    kind: SolutionKind,
    d: &[i64],
    params: &SolutionParams,
    quad: &QuadParams,
) -> Result<SolutionVector> {
    let m2 = m2_of(params.m)?;
    check_d(d, params, m2)?;
    let basis = solution_lattice(&params.l, params.m)?;
    let dim = basis.len();
    let r = m2;
    if r == 0 {
        // No integration: the solution is the bare master value at r = 0.
        let spec = params.master_spec(flavor_of(kind), 0);
        let v = crate::master::master_value(&spec, &[])?;
        return Ok(SolutionVector {
            values: vec![v; dim.min(1)],
            abs_err: vec![0.0; dim.min(1)],
            basis,
            metadata: json!({"kind": kind_tag(kind), "r": 0}),
        });
    }

    match kind {
        SolutionKind::Rational => {
            let contour = gamma_loops(d, &params.z, params.lambda, params.kappa, quad.clone(), 1e-15)?;
            let eval = |spec: &ContourSpec| -> Result<Vec<C64>> {
                let paths = spec.paths();
                let anchors: Vec<C64> = spec.loops.iter().map(|g| g.anchor()).collect();
                let mspec = params.master_spec(MasterFlavor::Rational, r);
                let (factors, anchor_logs, linear, prefactor) =
                    rational_master_parts(&mspec, &anchors)?;
                let z = params.z.clone();
                let basis = basis.clone();
                let integrand = NestedIntegrand {
                    factors,
                    anchor_logs,
                    linear,
                    prefactor,
                    smooth: Box::new(move |ts: &[C64]| {
                        basis
                            .iter()
                            .map(|dp| w_rational(dp, ts, &z).unwrap_or(cr(f64::NAN)))
                            .collect()
                    }),
                    dim,
                };
                integrate_nested(&paths, &integrand)
            };
            finish(kind, d, eval(&contour)?, eval(&contour.refined())?, basis, &contour)
        }
        SolutionKind::Trig => {
            let tail = trig_tail_power(params, r);
            let contour = delta_loops(d, &params.z, tail, quad.clone(), 1e-10)?;
            let centers = loop_assignment(d);
            let eval = |spec: &ContourSpec| -> Result<Vec<C64>> {
                let paths = spec.paths();
                let anchors: Vec<C64> = spec.loops.iter().map(|g| g.anchor()).collect();
                let mspec = params.master_spec(MasterFlavor::Trig, r);
                let (factors, anchor_logs, linear, prefactor) =
                    trig_master_parts(&mspec, &anchors, &centers)?;
                let z = params.z.clone();
                let basis = basis.clone();
                let integrand = NestedIntegrand {
                    factors,
                    anchor_logs,
                    linear,
                    prefactor,
                    smooth: Box::new(move |ts: &[C64]| {
                        basis
                            .iter()
                            .map(|dp| w_rational(dp, ts, &z).unwrap_or(cr(f64::NAN)))
                            .collect()
                    }),
                    dim,
                };
                integrate_nested(&paths, &integrand)
            };
            finish(kind, d, eval(&contour)?, eval(&contour.refined())?, basis, &contour)
        }
        SolutionKind::QMellinBarnes => {
            if params.kappa.im.abs() > 1e-12 || params.kappa.re <= 0.0 {
                return Err(HyperError::Region("κ must be real positive".into()));
            }
            let theta = (params.lambda.1 / params.lambda.0).arg();
            let theta = if theta <= 0.0 {
                theta + 2.0 * std::f64::consts::PI
            } else {
                theta
            };
            if theta < 0.05 || theta > 2.0 * std::f64::consts::PI - 0.05 {
                return Err(HyperError::Region(
                    "λ2/λ1 too close to the positive real axis".into(),
                ));
            }
            let kap = params.kappa.re;
            if kap <= 1.0 + 1e-6 {
                return Err(HyperError::Region("need κ > 1 for the anchored plane".into()));
            }
            // Offset window from the non-integer (continued) weights; integer
            // weights contribute no constraint because their ladder poles are
            // cancelled by the Gamma-ratio zeros or stay beyond κ − 1.
            let mut bound = kap - 1.0;
            let mut any_continued = false;
            for &li in &params.l {
                if as_nonneg_int(li).is_none() {
                    if li.re >= 0.0 {
                        return Err(HyperError::Region(
                            "non-integer l_i must have Re l_i < 0 in the continued region".into(),
                        ));
                    }
                    any_continued = true;
                    bound = bound.min(-li.re);
                }
            }
            if !any_continued {
                return Err(HyperError::Region(
                    "integer-l evaluation off the reference plane is out of scope; \
                     continue at least one weight to Re l_i < 0"
                        .into(),
                ));
            }
            let eps_t = 0.4 * bound;
            let anchor_re = params.z.iter().map(|v| v.re).fold(f64::NEG_INFINITY, f64::max);
            let mut contour = mb_plane(
                r,
                eps_t,
                &[cr(-bound)],
                theta / kap,
                (2.0 * std::f64::consts::PI - theta) / kap,
                quad.clone(),
                1e-12,
            )?;
            // Anchor the lines at the rightmost Re z.
            for line in &mut contour.lines {
                line.re += anchor_re;
            }
            let eval = |spec: &ContourSpec| -> Result<Vec<C64>> {
                let paths = spec.paths();
                let mspec = params.master_spec(MasterFlavor::QMaster, r);
                let z = params.z.clone();
                let l = params.l.clone();
                let kappa = params.kappa;
                let dvec = d.to_vec();
                let basis = basis.clone();
                let integrand = NestedIntegrand {
                    factors: Vec::new(),
                    anchor_logs: Vec::new(),
                    linear: vec![cr(0.0); r],
                    prefactor: cr(1.0),
                    smooth: Box::new(move |ts: &[C64]| {
                        let amp = q_master_value(&mspec, ts)
                            * w_trig(&dvec, ts, &z, &l, kappa).unwrap_or(cr(f64::NAN));
                        basis
                            .iter()
                            .map(|dp| {
                                amp * w_shifted(dp, ts, &z, &l).unwrap_or(cr(f64::NAN))
                            })
                            .collect()
                    }),
                    dim,
                };
                integrate_nested(&paths, &integrand)
            };
            finish(kind, d, eval(&contour)?, eval(&contour.refined())?, basis, &contour)
        }
    }
}

fn flavor_of(kind: SolutionKind) -> MasterFlavor {
    match kind {
        SolutionKind::Rational => MasterFlavor::Rational,
        SolutionKind::Trig => MasterFlavor::Trig,
        SolutionKind::QMellinBarnes => MasterFlavor::QMaster,
    }
}

fn kind_tag(kind: SolutionKind) -> &'static str {
    match kind {
        SolutionKind::Rational => "loop-rational",
        SolutionKind::Trig => "loop-trig",
        SolutionKind::QMellinBarnes => "mellin-barnes",
    }
}

/// Tail decay power of one trigonometric-loop variable.
pub fn trig_tail_power(params: &SolutionParams, r: usize) -> f64 {
    let (l1, l2) = params.lambda;
    let (m1, m2) = params.m;
    let suml: C64 = params.l.iter().sum();
    let e = ((l2 - l1 + m1 - m2 + cr(1.0) - suml + cr(2.0 * (r as f64 - 1.0))) / params.kappa).re
        - 1.0;
    -e
}

fn finish(
    kind: SolutionKind,
    d: &[i64],
    coarse: Vec<C64>,
    fine: Vec<C64>,
    basis: Vec<Vec<i64>>,
    contour: &ContourSpec,
) -> Result<SolutionVector> {
    let abs_err: Vec<f64> = coarse
        .iter()
        .zip(&fine)
        .map(|(a, b)| 2.0 * (a - b).norm() + 5e-14 * (1.0 + b.norm()))
        .collect();
    if fine.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(HyperError::NonConvergent("non-finite quadrature value".into()));
    }
    Ok(SolutionVector {
        values: fine,
        abs_err,
        basis,
        metadata: json!({
            "kind": kind_tag(kind),
            "d": d,
            "contour": contour,
        }),
    })
}

/// JSON export of a solution vector.
pub fn solution_to_json(sol: &SolutionVector) -> serde_json::Value {
    json!({
        "values": sol.values.iter().map(|v| [v.re, v.im]).collect::<Vec<_>>(),
        "abs_err": sol.abs_err,
        "basis": sol.basis,
        "metadata": sol.metadata,
    })
}
