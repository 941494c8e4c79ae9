//! Sampling-based verification of the operator identities: zero-curvature
//! (flatness) residuals for the differential families, exact functional
//! equations for the difference families, B/R relations, duality pairs, and
//! negative controls that guard against vacuous passes.
//!
//! Determinism: every sample draws from a counter-based ChaCha stream keyed
//! by `(seed, identity, sample index)`, so checks can run in any order or in
//! parallel and still reproduce byte-identical reports.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::duality;
use crate::glk::{enumerate_basis, TensorWeightSpace};
use crate::linalg::{c, cr, max_abs, C64, CMat};
use crate::ops::bseries::b_series;
use crate::ops::kzdd::{dd_coeff, kz_coeff, kz_coeff_corrupted, Flavor};
use crate::ops::qdd::x_a_matrix;
use crate::ops::qkz::{k_i_matrix, RTables};
use crate::ops::rmatrix::{r_factor_on_space, RMatrixTable};
use crate::ops::{ParamPoint, ParametricOperator, Var};
use crate::{CoreError, Result};

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FrameDescriptor {
    pub k: usize,
    pub n: usize,
    pub l: Vec<[f64; 2]>,
    pub m: Vec<[f64; 2]>,
}

impl FrameDescriptor {
    pub fn new(k: usize, n: usize, l: &[C64], m: &[C64]) -> Self {
        FrameDescriptor {
            k,
            n,
            l: l.iter().map(|v| [v.re, v.im]).collect(),
            m: m.iter().map(|v| [v.re, v.im]).collect(),
        }
    }

    pub fn weights(&self) -> (Vec<C64>, Vec<C64>) {
        (
            self.l.iter().map(|p| c(p[0], p[1])).collect(),
            self.m.iter().map(|p| c(p[0], p[1])).collect(),
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PointRecord {
    pub z: Vec<[f64; 2]>,
    pub lambda: Vec<[f64; 2]>,
    pub kappa: [f64; 2],
}

impl From<&ParamPoint> for PointRecord {
    fn from(p: &ParamPoint) -> Self {
        PointRecord {
            z: p.z.iter().map(|v| [v.re, v.im]).collect(),
            lambda: p.lambda.iter().map(|v| [v.re, v.im]).collect(),
            kappa: [p.kappa.re, p.kappa.im],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FailureDetail {
    pub sample: usize,
    pub point: PointRecord,
    pub residual: f64,
}

/// Per-identity residual statistics over sampled parameter points.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct VerificationReport {
    pub identity: String,
    pub frame: FrameDescriptor,
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub passed: bool,
    pub failures: Vec<FailureDetail>,
    /// Wall time is execution metadata, not part of the reproducible report.
    #[serde(skip)]
    pub wall_time: std::time::Duration,
}

// ---------------------------------------------------------------------------
// Counter-based sampling
// ---------------------------------------------------------------------------

fn splitmix64(x: &mut u64) -> u64 {
    *x = x.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// RNG stream keyed by `(seed, identity, sample index)`.
pub fn sample_rng(seed: u64, identity: &str, index: u64) -> ChaCha8Rng {
    let mut state = seed ^ fnv1a(identity.as_bytes()).rotate_left(1) ^ index.wrapping_mul(0xd6e8feb86659fd93);
    let mut key = [0u8; 32];
    for chunk in key.chunks_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum KappaPolicy {
    /// Random complex κ with modulus in [0.8, 2.5] and |Im κ| ≥ 0.1.
    ComplexGeneric,
    /// Real κ drawn uniformly from (min, max); used for q-integral work.
    RealPositive { min: f64, max: f64 },
    /// A fixed value.
    Fixed { re: f64, im: f64 },
}

impl Default for KappaPolicy {
    fn default() -> Self {
        KappaPolicy::ComplexGeneric
    }
}

fn draw_annulus(rng: &mut ChaCha8Rng, r_min: f64, r_max: f64) -> C64 {
    let r = r_min + (r_max - r_min) * rng.random::<f64>();
    let th = 2.0 * std::f64::consts::PI * rng.random::<f64>();
    c(r * th.cos(), r * th.sin())
}

fn draw_kappa(rng: &mut ChaCha8Rng, policy: KappaPolicy) -> C64 {
    match policy {
        KappaPolicy::ComplexGeneric => loop {
            let v = draw_annulus(rng, 0.8, 2.5);
            if v.im.abs() >= 0.1 {
                return v;
            }
        },
        KappaPolicy::RealPositive { min, max } => cr(min + (max - min) * rng.random::<f64>()),
        KappaPolicy::Fixed { re, im } => c(re, im),
    }
}

/// Minimal pairwise separation demanded of sampled tuples.
pub const SEPARATION_GATE: f64 = 1e-2;

fn well_separated(vals: &[C64]) -> bool {
    for i in 0..vals.len() {
        for j in (i + 1)..vals.len() {
            if (vals[i] - vals[j]).norm() < SEPARATION_GATE {
                return false;
            }
        }
    }
    true
}

/// Draw a parameter point with `z` and `λ` on annuli, resampling until the
/// validator accepts it (collision gates, shifted-point gates).
pub fn sample_point<F>(
    rng: &mut ChaCha8Rng,
    n: usize,
    k: usize,
    policy: KappaPolicy,
    mut valid: F,
) -> ParamPoint
where
    F: FnMut(&ParamPoint) -> bool,
{
    for _ in 0..10_000 {
        let z: Vec<C64> = (0..n).map(|_| draw_annulus(rng, 0.7, 1.6)).collect();
        let lambda: Vec<C64> = (0..k).map(|_| draw_annulus(rng, 0.7, 1.6)).collect();
        let kappa = draw_kappa(rng, policy);
        let p = ParamPoint::new(z, lambda, kappa);
        if well_separated(&p.z) && well_separated(&p.lambda) && valid(&p) {
            return p;
        }
    }
    panic!("sampling failed to find a valid point (overconstrained validator)");
}

/// Validator for difference identities: κ-shifted coordinates must stay away
/// from collisions and from zero.
pub fn shifted_separation(p: &ParamPoint) -> bool {
    let mut zs = p.z.clone();
    for i in 0..p.z.len() {
        zs.push(p.z[i] + p.kappa);
        zs.push(p.z[i] - p.kappa);
    }
    let mut ls = p.lambda.clone();
    for a in 0..p.lambda.len() {
        ls.push(p.lambda[a] + p.kappa);
        ls.push(p.lambda[a] - p.kappa);
    }
    let off_zero = |v: &[C64]| v.iter().all(|x| x.norm() > SEPARATION_GATE);
    // Pairwise separation among originals and their shifts, but shifted
    // copies of *different* coordinates may collide harmlessly; gate only
    // original-vs-shifted pairs that appear as operator arguments.
    let pairwise = |v: &[C64], orig: usize| -> bool {
        for i in 0..orig {
            for j in 0..v.len() {
                if i != j && (v[i] - v[j]).norm() < SEPARATION_GATE {
                    return false;
                }
            }
        }
        true
    };
    off_zero(&zs) && off_zero(&ls) && pairwise(&zs, p.z.len()) && pairwise(&ls, p.lambda.len())
}

// ---------------------------------------------------------------------------
// Generic per-sample runner
// ---------------------------------------------------------------------------

/// Run `samples` evaluations of a residual function and aggregate a report.
/// The closure gets the sample index and its private RNG stream and returns
/// the point it used plus the residual.
pub fn run_identity_check<F>(
    identity: &str,
    frame: FrameDescriptor,
    samples: usize,
    seed: u64,
    tolerance: f64,
    mut check: F,
) -> VerificationReport
where
    F: FnMut(usize, &mut ChaCha8Rng) -> Result<(ParamPoint, f64)>,
{
    let start = std::time::Instant::now();
    let mut max_res = 0.0f64;
    let mut sum = 0.0f64;
    let mut failures = Vec::new();
    for idx in 0..samples {
        let mut rng = sample_rng(seed, identity, idx as u64);
        match check(idx, &mut rng) {
            Ok((point, residual)) => {
                max_res = max_res.max(residual);
                sum += residual;
                if residual > tolerance {
                    failures.push(FailureDetail {
                        sample: idx,
                        point: PointRecord::from(&point),
                        residual,
                    });
                }
            }
            Err(e) => {
                failures.push(FailureDetail {
                    sample: idx,
                    point: PointRecord {
                        z: vec![],
                        lambda: vec![],
                        kappa: [0.0, 0.0],
                    },
                    residual: f64::INFINITY,
                });
                max_res = f64::INFINITY;
                let _ = e;
            }
        }
    }
    VerificationReport {
        identity: identity.to_string(),
        frame,
        samples,
        seed,
        tolerance,
        max_residual: max_res,
        mean_residual: if samples > 0 { sum / samples as f64 } else { 0.0 },
        passed: failures.is_empty(),
        failures,
        wall_time: start.elapsed(),
    }
}

// ---------------------------------------------------------------------------
// Flatness checks
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlatnessFamily {
    RatKz,
    TrigKz,
    RatDd,
    TrigDd,
    /// Cross pairs (z_i, λ_a) of the joint rational system.
    MixedKzDd,
}

impl FlatnessFamily {
    pub fn tag(&self) -> &'static str {
        match self {
            FlatnessFamily::RatKz => "ratKZ",
            FlatnessFamily::TrigKz => "trigKZ",
            FlatnessFamily::RatDd => "ratDD",
            FlatnessFamily::TrigDd => "trigDD",
            FlatnessFamily::MixedKzDd => "mixedKZDD",
        }
    }
}

fn theta(var: Var, p: &ParamPoint) -> C64 {
    match var {
        Var::Z(i) => p.z[i - 1],
        Var::Lambda(a) => p.lambda[a - 1],
    }
}

/// Zero-curvature residual `κ(θ_u A_v − θ_v A_u) − [A_u, A_v]` for one pair,
/// relative to the scale of its terms. `trig` selects θ = v ∂_v.
fn curvature_residual(
    opu: &ParametricOperator,
    u: Var,
    opv: &ParametricOperator,
    v: Var,
    trig: bool,
    p: &ParamPoint,
) -> Result<f64> {
    let au = opu.eval(p)?;
    let av = opv.eval(p)?;
    let mut du_av = opv.partial(p, u)?;
    let mut dv_au = opu.partial(p, v)?;
    if trig {
        du_av *= theta(u, p);
        dv_au *= theta(v, p);
    }
    let lhs: CMat = (du_av - dv_au) * p.kappa;
    let comm = &au * &av - &av * &au;
    let denom = 1.0 + max_abs(&lhs).max(max_abs(&(&au * &av)));
    Ok(max_abs(&(lhs - comm)) / denom)
}

/// Operator pairs of a flatness family on a space, with the trig flag.
#[allow(clippy::type_complexity)]
fn flatness_pairs(
    space: &TensorWeightSpace,
    family: FlatnessFamily,
    corrupted_omega: bool,
) -> Result<Vec<(ParametricOperator, Var, ParametricOperator, Var, bool)>> {
    let n = space.n;
    let k = space.k;
    let kz = |i: usize, fl: Flavor| -> Result<ParametricOperator> {
        if corrupted_omega {
            kz_coeff_corrupted(space, i, fl)
        } else {
            kz_coeff(space, i, fl)
        }
    };
    let mut pairs = Vec::new();
    match family {
        FlatnessFamily::RatKz | FlatnessFamily::TrigKz => {
            let fl = if family == FlatnessFamily::RatKz {
                Flavor::Rational
            } else {
                Flavor::Trig
            };
            for i in 1..=n {
                for j in (i + 1)..=n {
                    pairs.push((kz(i, fl)?, Var::Z(i), kz(j, fl)?, Var::Z(j), fl == Flavor::Trig));
                }
            }
        }
        FlatnessFamily::RatDd | FlatnessFamily::TrigDd => {
            let fl = if family == FlatnessFamily::RatDd {
                Flavor::Rational
            } else {
                Flavor::Trig
            };
            for a in 1..=k {
                for b in (a + 1)..=k {
                    pairs.push((
                        dd_coeff(space, a, fl)?,
                        Var::Lambda(a),
                        dd_coeff(space, b, fl)?,
                        Var::Lambda(b),
                        fl == Flavor::Trig,
                    ));
                }
            }
        }
        FlatnessFamily::MixedKzDd => {
            for i in 1..=n {
                for a in 1..=k {
                    pairs.push((
                        kz(i, Flavor::Rational)?,
                        Var::Z(i),
                        dd_coeff(space, a, Flavor::Rational)?,
                        Var::Lambda(a),
                        false,
                    ));
                }
            }
        }
    }
    Ok(pairs)
}

/// Zero-curvature verification for one family over sampled points.
pub fn check_flatness(
    space: &TensorWeightSpace,
    family: FlatnessFamily,
    samples: usize,
    seed: u64,
    tolerance: f64,
    policy: KappaPolicy,
) -> Result<VerificationReport> {
    check_flatness_inner(space, family, samples, seed, tolerance, policy, false, family.tag())
}

/// Negative control: the Casimir replaced by Ω₊ breaks flatness; the report's
/// `max_residual` is expected to be large (callers assert ≥ the control gate).
pub fn check_flatness_negative_control(
    space: &TensorWeightSpace,
    samples: usize,
    seed: u64,
    policy: KappaPolicy,
) -> Result<VerificationReport> {
    check_flatness_inner(
        space,
        FlatnessFamily::RatKz,
        samples,
        seed,
        f64::INFINITY,
        policy,
        true,
        "neg-omega",
    )
}

#[allow(clippy::too_many_arguments)]
fn check_flatness_inner(
    space: &TensorWeightSpace,
    family: FlatnessFamily,
    samples: usize,
    seed: u64,
    tolerance: f64,
    policy: KappaPolicy,
    corrupted: bool,
    tag: &str,
) -> Result<VerificationReport> {
    let pairs = flatness_pairs(space, family, corrupted)?;
    let frame = FrameDescriptor::new(space.k, space.n, &space.l, &space.m);
    let (n, k) = (space.n, space.k);
    Ok(run_identity_check(
        tag,
        frame,
        samples,
        seed,
        tolerance,
        move |_, rng| {
            let p = sample_point(rng, n, k, policy, |_| true);
            let mut worst = 0.0f64;
            for (opu, u, opv, v, trig) in &pairs {
                worst = worst.max(curvature_residual(opu, *u, opv, *v, *trig, &p)?);
            }
            Ok((p, worst))
        },
    ))
}

// ---------------------------------------------------------------------------
// Difference checks
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DifferenceFamily {
    QddBraid,
    QkzCommute,
    TrigKzQdd,
    QkzTrigDd,
}

impl DifferenceFamily {
    pub fn tag(&self) -> &'static str {
        match self {
            DifferenceFamily::QddBraid => "qDD-braid",
            DifferenceFamily::QkzCommute => "qKZ-commute",
            DifferenceFamily::TrigKzQdd => "trigKZ-qDD",
            DifferenceFamily::QkzTrigDd => "qKZ-trigDD",
        }
    }
}

/// Exact functional-equation residuals for the qDD/qKZ families.
pub fn check_difference(
    space: &TensorWeightSpace,
    family: DifferenceFamily,
    samples: usize,
    seed: u64,
    tolerance: f64,
    policy: KappaPolicy,
) -> Result<VerificationReport> {
    check_difference_inner(space, family, samples, seed, tolerance, policy, false, family.tag())
}

/// Negative control: κ replaced by −κ on one side of the qDD braid.
pub fn check_difference_negative_control(
    space: &TensorWeightSpace,
    samples: usize,
    seed: u64,
    policy: KappaPolicy,
) -> Result<VerificationReport> {
    check_difference_inner(
        space,
        DifferenceFamily::QddBraid,
        samples,
        seed,
        f64::INFINITY,
        policy,
        true,
        "neg-kappa",
    )
}

#[allow(clippy::too_many_arguments)]
fn check_difference_inner(
    space: &TensorWeightSpace,
    family: DifferenceFamily,
    samples: usize,
    seed: u64,
    tolerance: f64,
    policy: KappaPolicy,
    corrupt_kappa: bool,
    tag: &str,
) -> Result<VerificationReport> {
    let frame = FrameDescriptor::new(space.k, space.n, &space.l, &space.m);
    let (n, k) = (space.n, space.k);
    let tables = match family {
        DifferenceFamily::QkzCommute | DifferenceFamily::QkzTrigDd => {
            Some(RTables::for_space(space)?)
        }
        _ => None,
    };
    let space = space.clone();
    Ok(run_identity_check(
        tag,
        frame,
        samples,
        seed,
        tolerance,
        move |_, rng| {
            let p = sample_point(rng, n, k, policy, shifted_separation);
            let mut worst = 0.0f64;
            match family {
                DifferenceFamily::QddBraid => {
                    for a in 1..=k {
                        for b in 1..=k {
                            if a == b {
                                continue;
                            }
                            let xa = x_a_matrix(&space, a, &p)?;
                            let xb_sh = x_a_matrix(&space, b, &p.shift_lambda(a))?;
                            let xb = x_a_matrix(&space, b, &p)?;
                            let xa_sh = if corrupt_kappa {
                                let mut q = p.clone();
                                q.lambda[b - 1] -= p.kappa;
                                x_a_matrix(&space, a, &q)?
                            } else {
                                x_a_matrix(&space, a, &p.shift_lambda(b))?
                            };
                            worst = worst
                                .max(crate::linalg::rel_residual(&(xa * xb_sh), &(xb * xa_sh)));
                        }
                    }
                }
                DifferenceFamily::QkzCommute => {
                    let tables = tables.as_ref().unwrap();
                    for i in 1..=n {
                        for j in 1..=n {
                            if i == j {
                                continue;
                            }
                            let ki = k_i_matrix(&space, tables, i, &p)?;
                            let kj_sh = k_i_matrix(&space, tables, j, &p.shift_z(i))?;
                            let kj = k_i_matrix(&space, tables, j, &p)?;
                            let ki_sh = k_i_matrix(&space, tables, i, &p.shift_z(j))?;
                            worst = worst
                                .max(crate::linalg::rel_residual(&(ki * kj_sh), &(kj * ki_sh)));
                        }
                    }
                }
                DifferenceFamily::TrigKzQdd => {
                    for a in 1..=k {
                        let xop = crate::ops::qdd::qdd_factor(&space, a)?;
                        let xa = xop.eval(&p)?;
                        for i in 1..=n {
                            let ai = kz_coeff(&space, i, Flavor::Trig)?;
                            let lhs = xop.partial(&p, Var::Z(i))? * (p.kappa * p.z[i - 1])
                                - ai.eval(&p)? * &xa
                                + &xa * ai.eval(&p.shift_lambda(a))?;
                            let denom = 1.0 + max_abs(&(ai.eval(&p)? * &xa));
                            worst = worst.max(max_abs(&lhs) / denom);
                        }
                    }
                }
                DifferenceFamily::QkzTrigDd => {
                    let tables = tables.as_ref().unwrap();
                    for i in 1..=n {
                        let ki = k_i_matrix(&space, tables, i, &p)?;
                        for a in 1..=k {
                            let da = dd_coeff(&space, a, Flavor::Trig)?;
                            // analytic λ-partial of K_i via the diagonal factor
                            let kop = crate::ops::qkz::qkz_factor(&space, i)?;
                            let lhs = kop.partial(&p, Var::Lambda(a))?
                                * (p.kappa * p.lambda[a - 1])
                                - da.eval(&p)? * &ki
                                + &ki * da.eval(&p.shift_z(i))?;
                            let denom = 1.0 + max_abs(&(da.eval(&p)? * &ki));
                            worst = worst.max(max_abs(&lhs) / denom);
                        }
                    }
                }
            }
            Ok((p, worst))
        },
    ))
}

// ---------------------------------------------------------------------------
// B-series and R-matrix relation checks
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelationFamily {
    /// B is weight-zero: square on each weight space, commutes with Cartans.
    BZeroWeight,
    /// B_ab(t) B_ba(−t) = 1 − (m_a − m_b)/t.
    BInversion,
    /// B_ab(t−s) B_ac(t) B_bc(s) = B_bc(s) B_ac(t) B_ab(t−s); needs k ≥ 3.
    BBraid,
    /// R_VW(t) R_WV^(21)(−t) = 1 on the frame's factor pairs.
    RInversion,
    /// Yang–Baxter on a (V_1)^⊗3 auxiliary space of the same gl_k.
    RYangBaxter,
}

impl RelationFamily {
    pub fn tag(&self) -> &'static str {
        match self {
            RelationFamily::BZeroWeight => "B-Bx",
            RelationFamily::BInversion => "B-BB",
            RelationFamily::BBraid => "B-BBB",
            RelationFamily::RInversion => "R-inv",
            RelationFamily::RYangBaxter => "R-YB",
        }
    }
}

fn draw_t(rng: &mut ChaCha8Rng) -> C64 {
    draw_annulus(rng, 0.5, 2.2)
}

/// Check one B/R relation family over random spectral parameters.
pub fn check_relation(
    space: &TensorWeightSpace,
    family: RelationFamily,
    samples: usize,
    seed: u64,
    tolerance: f64,
) -> Result<VerificationReport> {
    let frame = FrameDescriptor::new(space.k, space.n, &space.l, &space.m);
    let k = space.k;
    let space = space.clone();
    Ok(run_identity_check(
        family.tag(),
        frame,
        samples,
        seed,
        tolerance,
        move |_, rng| {
            let t = draw_t(rng);
            let s = draw_t(rng);
            let point = ParamPoint::new(vec![t], vec![s], cr(0.0));
            let mut worst = 0.0f64;
            match family {
                RelationFamily::BZeroWeight => {
                    for a in 1..=k {
                        for b in 1..=k {
                            if a == b {
                                continue;
                            }
                            let bm = match b_series(&space, a, b, t) {
                                Ok(m) => m,
                                Err(CoreError::SingularPoint(_)) => continue,
                                Err(e) => return Err(e),
                            };
                            for x in 1..=k {
                                let (_, cart) =
                                    space.generator_matrix(x, x, crate::glk::Leg::Total)?;
                                let comm = crate::linalg::commutator(&bm, &cart);
                                worst = worst.max(max_abs(&comm) / (1.0 + max_abs(&bm)));
                            }
                        }
                    }
                }
                RelationFamily::BInversion => {
                    for a in 1..=k {
                        for b in 1..=k {
                            if a == b {
                                continue;
                            }
                            let lhs = match (b_series(&space, a, b, t), b_series(&space, b, a, -t))
                            {
                                (Ok(x), Ok(y)) => x * y,
                                _ => continue,
                            };
                            let scalar =
                                cr(1.0) - (space.m[a - 1] - space.m[b - 1]) / t;
                            let rhs = crate::linalg::eye(space.dim()) * scalar;
                            worst = worst.max(crate::linalg::rel_residual(&lhs, &rhs));
                        }
                    }
                }
                RelationFamily::BBraid => {
                    for a in 1..=k {
                        for b in 1..=k {
                            for cc in 1..=k {
                                if a == b || b == cc || a == cc {
                                    continue;
                                }
                                let f = |x: Result<CMat>| x;
                                let parts = (
                                    f(b_series(&space, a, b, t - s)),
                                    f(b_series(&space, a, cc, t)),
                                    f(b_series(&space, b, cc, s)),
                                );
                                let (Ok(bab), Ok(bac), Ok(bbc)) = parts else {
                                    continue;
                                };
                                let lhs = &bab * &bac * &bbc;
                                let rhs = &bbc * &bac * &bab;
                                worst = worst.max(crate::linalg::rel_residual(&lhs, &rhs));
                            }
                        }
                    }
                }
                RelationFamily::RInversion => {
                    for u in 1..=space.n {
                        for v in (u + 1)..=space.n {
                            let depth: i64 = space.m[1..]
                                .iter()
                                .map(|&w| crate::glk::as_nonneg_int(w).unwrap_or(0))
                                .sum();
                            let tab_uv =
                                RMatrixTable::new(k, space.l[u - 1], space.l[v - 1], depth as usize)?;
                            let tab_vu =
                                RMatrixTable::new(k, space.l[v - 1], space.l[u - 1], depth as usize)?;
                            let ruv = match tab_uv.eval(t) {
                                Ok(r) => r,
                                Err(_) => continue,
                            };
                            let rvu = match tab_vu.eval(-t) {
                                Ok(r) => r,
                                Err(_) => continue,
                            };
                            for key in tab_uv.block_keys() {
                                let pa = tab_uv.block_pairs(key).unwrap();
                                let pb = tab_vu.block_pairs(key).unwrap();
                                let mut p = crate::linalg::zeros(pb.len(), pa.len());
                                for (col, &(iu, iv)) in pa.iter().enumerate() {
                                    if let Some(row) = pb.iter().position(|&q| q == (iv, iu)) {
                                        p[(row, col)] = cr(1.0);
                                    }
                                }
                                let prod = &ruv.blocks[key]
                                    * p.transpose()
                                    * &rvu.blocks[key]
                                    * &p;
                                worst = worst.max(crate::linalg::rel_residual(
                                    &prod,
                                    &crate::linalg::eye(pa.len()),
                                ));
                            }
                        }
                    }
                }
                RelationFamily::RYangBaxter => {
                    // (V_1)^⊗3 of gl_k at a fundamental-type weight.
                    let mut m = vec![cr(1.0); k];
                    m[0] = cr(3.0 - (k as f64 - 1.0));
                    let aux = enumerate_basis(k, 3, &[cr(1.0), cr(1.0), cr(1.0)], &m)?;
                    let table = RMatrixTable::new(k, cr(1.0), cr(1.0), 3)?;
                    let r12 = r_factor_on_space(&aux, &table, 1, 2, t - s)?;
                    let r13 = r_factor_on_space(&aux, &table, 1, 3, t)?;
                    let r23 = r_factor_on_space(&aux, &table, 2, 3, s)?;
                    let lhs = &r12 * &r13 * &r23;
                    let rhs = &r23 * &r13 * &r12;
                    worst = worst.max(crate::linalg::rel_residual(&lhs, &rhs));
                }
            }
            Ok((point, worst))
        },
    ))
}

// ---------------------------------------------------------------------------
// Suite
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Tolerances {
    /// Checks with analytic derivatives.
    pub analytic: f64,
    /// Checks exercising the finite-difference fallback.
    pub finite_difference: f64,
    /// Negative controls must reach at least this residual.
    pub negative_min: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            analytic: 1e-9,
            finite_difference: 1e-6,
            negative_min: 1e-2,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunConfig {
    pub k: usize,
    pub n: usize,
    pub l: Vec<[f64; 2]>,
    pub m: Vec<[f64; 2]>,
    #[serde(default)]
    pub kappa_policy: KappaPolicy,
    pub samples: usize,
    pub seed: u64,
    pub identities: Vec<String>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl RunConfig {
    /// The default suite: every theorem-backed identity plus the negative
    /// controls, on the k = n = 2 frame with unit weights.
    pub fn default_suite(seed: u64, samples: usize) -> Self {
        RunConfig {
            k: 2,
            n: 2,
            l: vec![[1.0, 0.0], [1.0, 0.0]],
            m: vec![[1.0, 0.0], [1.0, 0.0]],
            kappa_policy: KappaPolicy::ComplexGeneric,
            samples,
            seed,
            identities: DEFAULT_IDENTITIES.iter().map(|s| s.to_string()).collect(),
            tolerances: Tolerances::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.l.len() != self.n || self.m.len() != self.k {
            return Err(CoreError::InvalidConfig(format!(
                "l must have n = {} entries and m must have k = {} entries",
                self.n, self.k
            )));
        }
        for id in &self.identities {
            if !DEFAULT_IDENTITIES.contains(&id.as_str()) {
                return Err(CoreError::InvalidConfig(format!("unknown identity {id:?}")));
            }
        }
        Ok(())
    }
}

pub const DEFAULT_IDENTITIES: &[&str] = &[
    "ratKZ",
    "trigKZ",
    "ratDD",
    "trigDD",
    "mixedKZDD",
    "B-Bx",
    "B-BB",
    "B-BBB",
    "R-inv",
    "R-YB",
    "qDD-braid",
    "qKZ-commute",
    "trigKZ-qDD",
    "qKZ-trigDD",
    "dual-nD",
    "dual-hD",
    "dual-ZQ",
    "dual-QZ",
    "dual-BR",
    "neg-omega",
    "neg-kappa",
];

/// Identity tags covering each verified statement; the union must be a subset
/// of the default suite (asserted in tests), so every statement keeps at
/// least one live check.
pub const COVERAGE: &[(&str, &[&str])] = &[
    ("rational KZ operators pairwise commute", &["ratKZ"]),
    ("trigonometric KZ operators pairwise commute", &["trigKZ"]),
    (
        "rational KZ and dynamical operators jointly commute",
        &["ratKZ", "ratDD", "mixedKZDD"],
    ),
    ("trigonometric dynamical operators pairwise commute", &["trigDD"]),
    (
        "trig KZ and qDD operators pairwise commute",
        &["trigKZ-qDD", "qDD-braid"],
    ),
    (
        "qKZ and trig dynamical operators pairwise commute",
        &["qKZ-commute", "qKZ-trigDD"],
    ),
    ("B-series relations", &["B-Bx", "B-BB", "B-BBB"]),
    ("R-matrix inversion and Yang-Baxter", &["R-inv", "R-YB"]),
    (
        "duality of differential families through the weight-space isomorphism",
        &["dual-nD", "dual-hD"],
    ),
    (
        "duality of difference families with normalization scalars",
        &["dual-ZQ", "dual-QZ"],
    ),
    ("B·C matches the dual R-matrix", &["dual-BR"]),
];

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SuiteResult {
    pub config: RunConfig,
    pub reports: Vec<VerificationReport>,
    pub all_passed: bool,
}

/// Run every requested identity on the configured frame, in config order.
pub fn run_suite(config: &RunConfig) -> Result<SuiteResult> {
    config.validate()?;
    let (l, m): (Vec<C64>, Vec<C64>) = (
        config.l.iter().map(|p| c(p[0], p[1])).collect(),
        config.m.iter().map(|p| c(p[0], p[1])).collect(),
    );
    let space = enumerate_basis(config.k, config.n, &l, &m)?;
    let tol = &config.tolerances;
    let mut reports = Vec::new();
    for id in &config.identities {
        let report = match id.as_str() {
            "ratKZ" => check_flatness(&space, FlatnessFamily::RatKz, config.samples, config.seed, tol.analytic, config.kappa_policy)?,
            "trigKZ" => check_flatness(&space, FlatnessFamily::TrigKz, config.samples, config.seed, tol.analytic, config.kappa_policy)?,
            "ratDD" => check_flatness(&space, FlatnessFamily::RatDd, config.samples, config.seed, tol.analytic, config.kappa_policy)?,
            "trigDD" => check_flatness(&space, FlatnessFamily::TrigDd, config.samples, config.seed, tol.analytic, config.kappa_policy)?,
            "mixedKZDD" => check_flatness(&space, FlatnessFamily::MixedKzDd, config.samples, config.seed, tol.analytic, config.kappa_policy)?,
            "B-Bx" => check_relation(&space, RelationFamily::BZeroWeight, config.samples, config.seed, tol.analytic)?,
            "B-BB" => check_relation(&space, RelationFamily::BInversion, config.samples, config.seed, tol.analytic)?,
            "B-BBB" => check_relation(&space, RelationFamily::BBraid, config.samples, config.seed, tol.analytic)?,
            "R-inv" => check_relation(&space, RelationFamily::RInversion, config.samples, config.seed, tol.analytic)?,
            "R-YB" => check_relation(&space, RelationFamily::RYangBaxter, config.samples, config.seed, tol.analytic)?,
            "qDD-braid" => check_difference(&space, DifferenceFamily::QddBraid, config.samples, config.seed, tol.analytic, config.kappa_policy)?,
            "qKZ-commute" => check_difference(&space, DifferenceFamily::QkzCommute, config.samples, config.seed, tol.analytic, config.kappa_policy)?,
            "trigKZ-qDD" => check_difference(&space, DifferenceFamily::TrigKzQdd, config.samples, config.seed, tol.analytic, config.kappa_policy)?,
            "qKZ-trigDD" => check_difference(&space, DifferenceFamily::QkzTrigDd, config.samples, config.seed, tol.analytic, config.kappa_policy)?,
            "dual-nD" => duality::check_duality_pair(&duality::build_frame(config.k, config.n, &l, &m)?, duality::DualityPair::RationalNablaD, config.samples, config.seed, tol.analytic, config.kappa_policy)?,
            "dual-hD" => duality::check_duality_pair(&duality::build_frame(config.k, config.n, &l, &m)?, duality::DualityPair::TrigNablaD, config.samples, config.seed, tol.analytic, config.kappa_policy)?,
            "dual-ZQ" => duality::check_duality_pair(&duality::build_frame(config.k, config.n, &l, &m)?, duality::DualityPair::ZQ, config.samples, config.seed, tol.analytic, config.kappa_policy)?,
            "dual-QZ" => duality::check_duality_pair(&duality::build_frame(config.k, config.n, &l, &m)?, duality::DualityPair::QZ, config.samples, config.seed, tol.analytic, config.kappa_policy)?,
            "dual-BR" => duality::check_br(&duality::build_frame(config.k, config.n, &l, &m)?, config.samples, config.seed, tol.analytic)?,
            "neg-omega" => {
                let mut r = check_flatness_negative_control(&space, config.samples, config.seed, config.kappa_policy)?;
                r.tolerance = tol.negative_min;
                r.passed = r.max_residual >= tol.negative_min;
                r
            }
            "neg-kappa" => {
                let mut r = check_difference_negative_control(&space, config.samples, config.seed, config.kappa_policy)?;
                r.tolerance = tol.negative_min;
                r.passed = r.max_residual >= tol.negative_min;
                r
            }
            other => return Err(CoreError::InvalidConfig(format!("unknown identity {other:?}"))),
        };
        reports.push(report);
    }
    let all_passed = reports.iter().all(|r| r.passed);
    Ok(SuiteResult {
        config: config.clone(),
        reports,
        all_passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::glk::reals;

    fn unit_space() -> TensorWeightSpace {
        enumerate_basis(2, 2, &reals(&[1.0, 1.0]), &reals(&[1.0, 1.0])).unwrap()
    }

    #[test]
    fn sampler_is_counter_based() {
        let mut a = sample_rng(42, "ratKZ", 7);
        let mut b = sample_rng(42, "ratKZ", 7);
        assert_eq!(a.random::<u64>(), b.random::<u64>());
        let mut c1 = sample_rng(42, "ratKZ", 8);
        assert_ne!(sample_rng(42, "ratKZ", 7).random::<u64>(), c1.random::<u64>());
        let mut d = sample_rng(42, "trigKZ", 7);
        assert_ne!(sample_rng(42, "ratKZ", 7).random::<u64>(), d.random::<u64>());
    }

    #[test]
    fn flatness_families_pass() {
        let space = unit_space();
        for family in [
            FlatnessFamily::RatKz,
            FlatnessFamily::TrigKz,
            FlatnessFamily::RatDd,
            FlatnessFamily::TrigDd,
            FlatnessFamily::MixedKzDd,
        ] {
            let r = check_flatness(&space, family, 5, 7, 1e-9, KappaPolicy::ComplexGeneric)
                .unwrap();
            assert!(r.passed, "{} max={:.3e}", r.identity, r.max_residual);
        }
    }

    #[test]
    fn flatness_vacuous_single_operator() {
        // n = 1 rational KZ: no pairs, vacuous pass.
        let space = enumerate_basis(2, 1, &reals(&[2.0]), &reals(&[1.0, 1.0])).unwrap();
        let r = check_flatness(&space, FlatnessFamily::RatKz, 3, 1, 1e-9, KappaPolicy::ComplexGeneric).unwrap();
        assert!(r.passed);
        assert_eq!(r.max_residual, 0.0);
    }

    #[test]
    fn difference_families_pass() {
        let space = unit_space();
        for family in [
            DifferenceFamily::QddBraid,
            DifferenceFamily::QkzCommute,
            DifferenceFamily::TrigKzQdd,
            DifferenceFamily::QkzTrigDd,
        ] {
            let r = check_difference(&space, family, 3, 11, 1e-9, KappaPolicy::ComplexGeneric)
                .unwrap();
            assert!(r.passed, "{} max={:.3e}", r.identity, r.max_residual);
        }
    }

    #[test]
    fn negative_controls_fail_loudly() {
        let space = unit_space();
        let r = check_flatness_negative_control(&space, 4, 3, KappaPolicy::ComplexGeneric).unwrap();
        assert!(r.max_residual >= 1e-2, "omega control too quiet: {}", r.max_residual);
        let r = check_difference_negative_control(&space, 3, 3, KappaPolicy::ComplexGeneric).unwrap();
        assert!(r.max_residual >= 1e-2, "kappa control too quiet: {}", r.max_residual);
    }

    #[test]
    fn relation_families_pass() {
        let space = unit_space();
        for family in [
            RelationFamily::BZeroWeight,
            RelationFamily::BInversion,
            RelationFamily::RInversion,
            RelationFamily::RYangBaxter,
        ] {
            let r = check_relation(&space, family, 3, 5, 1e-9).unwrap();
            assert!(r.passed, "{} max={:.3e}", r.identity, r.max_residual);
        }
        // Braid needs k ≥ 3.
        let space3 =
            enumerate_basis(3, 2, &reals(&[2.0, 1.0]), &reals(&[1.0, 1.0, 1.0])).unwrap();
        let r = check_relation(&space3, RelationFamily::BBraid, 3, 5, 1e-9).unwrap();
        assert!(r.passed, "braid max={:.3e}", r.max_residual);
    }

    #[test]
    fn coverage_is_inside_default_suite() {
        for (_, tags) in COVERAGE {
            for tag in *tags {
                assert!(
                    DEFAULT_IDENTITIES.contains(tag),
                    "coverage tag {tag} missing from default suite"
                );
            }
        }
    }

    #[test]
    fn reports_are_deterministic() {
        let space = unit_space();
        let a = check_flatness(&space, FlatnessFamily::RatKz, 4, 99, 1e-9, KappaPolicy::ComplexGeneric).unwrap();
        let b = check_flatness(&space, FlatnessFamily::RatKz, 4, 99, 1e-9, KappaPolicy::ComplexGeneric).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn empty_identity_list_is_success() {
        let mut cfg = RunConfig::default_suite(1, 1);
        cfg.identities.clear();
        let out = run_suite(&cfg).unwrap();
        assert!(out.all_passed);
        assert!(out.reports.is_empty());
    }
}
