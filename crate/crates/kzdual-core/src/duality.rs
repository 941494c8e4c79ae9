//! The `(gl_k, gl_n)` duality frame: the polynomial-ring weight subspace
//! realized simultaneously as a `gl_k` and a `gl_n` tensor weight space, the
//! isomorphism `φ` matching the two divided-power bases (transposition of
//! lattice matrices), the normalization scalars built from `C`-factors, and
//! operator-level duality checks.
//!
//! With `d ↦ dᵀ` on lattice points, every `gl_k`-side operator family equals
//! its `gl_n`-side partner conjugated through `φ`, with `z` and `λ` swapping
//! roles; the difference families pick up the scalars
//!
//! ```text
//! N_i(z) = ∏_{j<i} C_ji(z_ji − κ) · ∏_{j>i} C_ij(z_ij)⁻¹ .
//! ```

use rand_chacha::ChaCha8Rng;

use crate::glk::{enumerate_basis, LatticePoint, TensorWeightSpace};
use crate::linalg::{cr, zeros, C64, CMat};
use crate::ops::bseries::{b_series, c_product};
use crate::ops::kzdd::{dd_coeff, kz_coeff, Flavor};
use crate::ops::qdd::x_a_matrix;
use crate::ops::qkz::{k_i_matrix, RTables};
use crate::ops::rmatrix::{r_factor_on_space, RMatrixTable};
use crate::ops::ParamPoint;
use crate::verify::{
    run_identity_check, sample_point, shifted_separation, FrameDescriptor, KappaPolicy,
    VerificationReport,
};
use crate::{CoreError, Result};

/// The two sides of one weight subspace and the index bijection between
/// their bases.
#[derive(Debug, Clone)]
pub struct DualityFrame {
    pub k: usize,
    pub n: usize,
    pub l: Vec<C64>,
    pub m: Vec<C64>,
    /// `(V_{l_1} ⊗ … ⊗ V_{l_n})[m]` over `gl_k`.
    pub space_k: TensorWeightSpace,
    /// `(V_{m_1} ⊗ … ⊗ V_{m_k})[l]` over `gl_n`.
    pub space_n: TensorWeightSpace,
    /// `phi[i]` = position of the transposed lattice point on the `gl_n` side.
    pub phi: Vec<usize>,
}

/// Enumerate both sides and match bases through matrix transposition.
pub fn build_frame(k: usize, n: usize, l: &[C64], m: &[C64]) -> Result<DualityFrame> {
    let space_k = enumerate_basis(k, n, l, m)?;
    let space_n = enumerate_basis(n, k, m, l)?;
    if space_k.dim() != space_n.dim() {
        return Err(CoreError::InvalidConfig(format!(
            "side dimensions differ: {} vs {}",
            space_k.dim(),
            space_n.dim()
        )));
    }
    let mut phi = Vec::with_capacity(space_k.dim());
    for idx in 0..space_k.dim() {
        // Transpose: d'_{i,a} = d_{a,i}; every non-(1,1) entry of dᵀ is a
        // non-(1,1) entry of d, hence an integer.
        let mut free = Vec::with_capacity(k * n - 1);
        for i in 1..=n {
            for a in 1..=k {
                if (i, a) == (1, 1) {
                    continue;
                }
                free.push(space_k.entry_int(idx, a, i));
            }
        }
        let pos = space_n
            .position(&LatticePoint::from_free(free))
            .ok_or_else(|| CoreError::InvalidConfig("transposed point missing on dual side".into()))?;
        phi.push(pos);
    }
    Ok(DualityFrame {
        k,
        n,
        l: l.to_vec(),
        m: m.to_vec(),
        space_k,
        space_n,
        phi,
    })
}

impl DualityFrame {
    pub fn descriptor(&self) -> FrameDescriptor {
        FrameDescriptor::new(self.k, self.n, &self.l, &self.m)
    }

    /// Is `φ` the identity permutation under the frozen basis orders?
    pub fn phi_is_identity(&self) -> bool {
        self.phi.iter().enumerate().all(|(i, &p)| i == p)
    }

    /// Conjugate a `gl_n`-side matrix back to the `gl_k` side:
    /// `(φ⁻¹ M φ)[r, c] = M[φ(r), φ(c)]`.
    pub fn pull_back(&self, m_n: &CMat) -> CMat {
        let d = self.phi.len();
        let mut out = zeros(d, d);
        for r in 0..d {
            for c in 0..d {
                out[(r, c)] = m_n[(self.phi[r], self.phi[c])];
            }
        }
        out
    }

    /// Pull a `gl_n`-side coordinate vector back to the `gl_k` side.
    pub fn pull_back_vec(&self, v_n: &[C64]) -> Vec<C64> {
        self.phi.iter().map(|&p| v_n[p]).collect()
    }
}

/// Which duality family to verify.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DualityPair {
    /// Rational KZ ↔ rational dynamical (both directions).
    RationalNablaD,
    /// Trigonometric KZ ↔ trigonometric dynamical (both directions).
    TrigNablaD,
    /// qKZ factor K_i ↔ N_i · (dual qDD factor X_i).
    ZQ,
    /// N_a · (qDD factor X_a) ↔ dual qKZ factor K_a.
    QZ,
}

impl DualityPair {
    pub fn tag(&self) -> &'static str {
        match self {
            DualityPair::RationalNablaD => "dual-nD",
            DualityPair::TrigNablaD => "dual-hD",
            DualityPair::ZQ => "dual-ZQ",
            DualityPair::QZ => "dual-QZ",
        }
    }
}

/// Restriction scalar of `C_uv(t)` on a weight list (`weights[v-1]` must be a
/// nonnegative integer).
fn c_on(weights: &[C64], u: usize, v: usize, t: C64) -> Result<C64> {
    let wv = crate::glk::as_nonneg_int(weights[v - 1]).ok_or_else(|| CoreError::NonIntegerWeight {
        name: format!("weight_{v}"),
        value: weights[v - 1],
    })?;
    c_product(t, weights[u - 1], wv)
}

/// `N_i(z)` on the `gl_n` side of the frame (weights `l`, arguments `z`).
pub fn normalization_scalar_n(frame: &DualityFrame, i: usize, z: &[C64], kappa: C64) -> Result<C64> {
    let mut acc = cr(1.0);
    for j in 1..i {
        acc *= c_on(&frame.l, j, i, z[j - 1] - z[i - 1] - kappa)?;
    }
    for j in (i + 1)..=frame.n {
        acc /= c_on(&frame.l, i, j, z[i - 1] - z[j - 1])?;
    }
    Ok(acc)
}

/// `N_a(λ)` on the `gl_k` side of the frame (weights `m`, arguments `λ`).
pub fn normalization_scalar_k(
    frame: &DualityFrame,
    a: usize,
    lambda: &[C64],
    kappa: C64,
) -> Result<C64> {
    let mut acc = cr(1.0);
    for b in 1..a {
        acc *= c_on(&frame.m, b, a, lambda[b - 1] - lambda[a - 1] - kappa)?;
    }
    for b in (a + 1)..=frame.k {
        acc /= c_on(&frame.m, a, b, lambda[a - 1] - lambda[b - 1])?;
    }
    Ok(acc)
}

/// Worst residual of one duality family at one parameter point.
pub fn duality_residual_at(
    frame: &DualityFrame,
    pair: DualityPair,
    p: &ParamPoint,
    tables_k: Option<&RTables>,
    tables_n: Option<&RTables>,
) -> Result<f64> {
    let q = p.swapped();
    let mut worst = 0.0f64;
    match pair {
        DualityPair::RationalNablaD | DualityPair::TrigNablaD => {
            let fl = if pair == DualityPair::RationalNablaD {
                Flavor::Rational
            } else {
                Flavor::Trig
            };
            for i in 1..=frame.n {
                let lhs = kz_coeff(&frame.space_k, i, fl)?.eval(p)?;
                let rhs = frame.pull_back(&dd_coeff(&frame.space_n, i, fl)?.eval(&q)?);
                worst = worst.max(crate::linalg::rel_residual(&lhs, &rhs));
            }
            for a in 1..=frame.k {
                let lhs = dd_coeff(&frame.space_k, a, fl)?.eval(p)?;
                let rhs = frame.pull_back(&kz_coeff(&frame.space_n, a, fl)?.eval(&q)?);
                worst = worst.max(crate::linalg::rel_residual(&lhs, &rhs));
            }
        }
        DualityPair::ZQ => {
            let tk = tables_k.expect("qKZ tables for the gl_k side");
            for i in 1..=frame.n {
                let lhs = k_i_matrix(&frame.space_k, tk, i, p)?;
                let scalar = normalization_scalar_n(frame, i, &p.z, p.kappa)?;
                let rhs = frame.pull_back(&x_a_matrix(&frame.space_n, i, &q)?) * scalar;
                worst = worst.max(crate::linalg::rel_residual(&lhs, &rhs));
            }
        }
        DualityPair::QZ => {
            let tn = tables_n.expect("qKZ tables for the gl_n side");
            for a in 1..=frame.k {
                let scalar = normalization_scalar_k(frame, a, &p.lambda, p.kappa)?;
                let lhs = x_a_matrix(&frame.space_k, a, p)? * scalar;
                let rhs = frame.pull_back(&k_i_matrix(&frame.space_n, tn, a, &q)?);
                worst = worst.max(crate::linalg::rel_residual(&lhs, &rhs));
            }
        }
    }
    Ok(worst)
}

/// Sampled verification of one duality family.
pub fn check_duality_pair(
    frame: &DualityFrame,
    pair: DualityPair,
    samples: usize,
    seed: u64,
    tolerance: f64,
    policy: KappaPolicy,
) -> Result<VerificationReport> {
    let tables_k = match pair {
        DualityPair::ZQ => Some(RTables::for_space(&frame.space_k)?),
        _ => None,
    };
    let tables_n = match pair {
        DualityPair::QZ => Some(RTables::for_space(&frame.space_n)?),
        _ => None,
    };
    let frame = frame.clone();
    let (n, k) = (frame.n, frame.k);
    Ok(run_identity_check(
        pair.tag(),
        frame.descriptor(),
        samples,
        seed,
        tolerance,
        move |_, rng: &mut ChaCha8Rng| {
            let p = sample_point(rng, n, k, policy, shifted_separation);
            let res = duality_residual_at(&frame, pair, &p, tables_k.as_ref(), tables_n.as_ref())?;
            Ok((p, res))
        },
    ))
}

/// Verify `B_ab(t) C_ab(t) = φ⁻¹ R_ab(t) φ` in both directions over random
/// spectral parameters.
pub fn check_br(
    frame: &DualityFrame,
    samples: usize,
    seed: u64,
    tolerance: f64,
) -> Result<VerificationReport> {
    let frame = frame.clone();
    Ok(run_identity_check(
        "dual-BR",
        frame.descriptor(),
        samples,
        seed,
        tolerance,
        move |_, rng: &mut ChaCha8Rng| {
            // Draw t away from the finitely many candidate poles.
            let mut t;
            loop {
                let r = 0.4 + 2.0 * rand::Rng::random::<f64>(rng);
                let th = 2.0 * std::f64::consts::PI * rand::Rng::random::<f64>(rng);
                t = crate::linalg::c(r * th.cos(), r * th.sin());
                if t.im.abs() > 0.05 {
                    break;
                }
            }
            let point = ParamPoint::new(vec![t], vec![], cr(0.0));
            let res = br_residual_at(&frame, t)?;
            Ok((point, res))
        },
    ))
}

/// Worst residual of the B·C ↔ R identity at one spectral parameter.
pub fn br_residual_at(frame: &DualityFrame, t: C64) -> Result<f64> {
    let mut worst = 0.0f64;
    // gl_k side B·C against the gl_n side R on factors (a, b).
    let depth_n: i64 = frame
        .l
        .iter()
        .skip(1)
        .map(|&v| crate::glk::as_nonneg_int(v).unwrap_or(0))
        .sum();
    for a in 1..=frame.k {
        for b in 1..=frame.k {
            if a == b {
                continue;
            }
            let bm = b_series(&frame.space_k, a, b, t)?;
            let scalar = c_on(&frame.m, a, b, t)?;
            let lhs = bm * scalar;
            let table = RMatrixTable::new(
                frame.n,
                frame.m[a - 1],
                frame.m[b - 1],
                depth_n as usize,
            )?;
            let rhs = frame.pull_back(&r_factor_on_space(&frame.space_n, &table, a, b, t)?);
            worst = worst.max(crate::linalg::rel_residual(&lhs, &rhs));
        }
    }
    // gl_k side R on factors (i, j) against the gl_n side B·C.
    let depth_k: i64 = frame
        .m
        .iter()
        .skip(1)
        .map(|&v| crate::glk::as_nonneg_int(v).unwrap_or(0))
        .sum();
    for i in 1..=frame.n {
        for j in 1..=frame.n {
            if i == j {
                continue;
            }
            let table = RMatrixTable::new(
                frame.k,
                frame.l[i - 1],
                frame.l[j - 1],
                depth_k as usize,
            )?;
            let lhs = r_factor_on_space(&frame.space_k, &table, i, j, t)?;
            let bm = b_series(&frame.space_n, i, j, t)?;
            let scalar = c_on(&frame.l, i, j, t)?;
            let rhs = frame.pull_back(&(bm * scalar));
            worst = worst.max(crate::linalg::rel_residual(&lhs, &rhs));
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::glk::reals;
    use crate::linalg::{c, eye, max_abs};

    fn unit_frame() -> DualityFrame {
        build_frame(2, 2, &reals(&[1.0, 1.0]), &reals(&[1.0, 1.0])).unwrap()
    }

    #[test]
    fn frame_k2n2_phi_identity() {
        let f = unit_frame();
        assert_eq!(f.space_k.dim(), 2);
        assert!(f.phi_is_identity());
    }

    #[test]
    fn frame_k2n1_one_dimensional() {
        // S_k is a single highest-weight line; S_n is the weight-(l1) line of
        // V_{m1} ⊗ V_{m2} over gl_1.
        let f = build_frame(2, 1, &reals(&[3.0]), &reals(&[2.0, 1.0])).unwrap();
        assert_eq!(f.space_k.dim(), 1);
        assert_eq!(f.space_n.dim(), 1);
        assert!(f.phi_is_identity());
    }

    #[test]
    fn frame_continued_weights() {
        let l1 = c(1.9, 0.45);
        let f = build_frame(2, 2, &[l1, cr(1.0)], &[l1, cr(1.0)]).unwrap();
        assert_eq!(f.space_k.dim(), 2);
        assert!(f.phi_is_identity());
    }

    #[test]
    fn normalization_examples() {
        // n = 1: empty products.
        let f = build_frame(2, 1, &reals(&[3.0]), &reals(&[2.0, 1.0])).unwrap();
        let one = normalization_scalar_n(&f, 1, &[cr(0.4)], cr(1.9)).unwrap();
        assert_eq!(one, cr(1.0));
        // k = 2, a = 1 on the unit frame: N_1(λ) = (C_12(λ_12))⁻¹ = (λ_12+1)/(λ_12−1).
        let f = unit_frame();
        let lambda = [c(1.3, 0.2), c(-0.4, 0.7)];
        let t = lambda[0] - lambda[1];
        let got = normalization_scalar_k(&f, 1, &lambda, cr(2.1)).unwrap();
        let expect = (t + cr(1.0)) / (t - cr(1.0));
        assert!((got - expect).norm() < 1e-14);
    }

    #[test]
    fn rational_duality_point_check() {
        let f = unit_frame();
        let p = ParamPoint::new(
            vec![c(0.9, 0.2), c(-0.7, 0.5)],
            vec![c(1.3, 0.3), c(-0.6, -0.4)],
            c(1.8, 0.4),
        );
        let res = duality_residual_at(&f, DualityPair::RationalNablaD, &p, None, None).unwrap();
        assert!(res < 1e-12, "residual {res}");
        let res = duality_residual_at(&f, DualityPair::TrigNablaD, &p, None, None).unwrap();
        assert!(res < 1e-12, "residual {res}");
    }

    #[test]
    fn rank_one_duality_trivial() {
        // k = n = 1: both sides are κ∂ − λ_1 z_1 on a line.
        let f = build_frame(1, 1, &reals(&[4.0]), &reals(&[4.0])).unwrap();
        let p = ParamPoint::new(vec![c(0.8, 0.1)], vec![c(1.2, -0.3)], c(2.0, 0.5));
        let res = duality_residual_at(&f, DualityPair::RationalNablaD, &p, None, None).unwrap();
        assert!(res < 1e-15);
    }

    #[test]
    fn difference_duality_point_check() {
        let f = unit_frame();
        let p = ParamPoint::new(
            vec![c(0.95, 0.2), c(-0.7, 0.55)],
            vec![c(1.35, 0.3), c(-0.65, -0.45)],
            c(1.75, 0.45),
        );
        let tk = RTables::for_space(&f.space_k).unwrap();
        let tn = RTables::for_space(&f.space_n).unwrap();
        let res = duality_residual_at(&f, DualityPair::ZQ, &p, Some(&tk), None).unwrap();
        assert!(res < 1e-10, "ZQ residual {res}");
        let res = duality_residual_at(&f, DualityPair::QZ, &p, None, Some(&tn)).unwrap();
        assert!(res < 1e-10, "QZ residual {res}");
    }

    #[test]
    fn continued_frame_duality() {
        // Complex l_1 = m_1 exercises the analytic continuation.
        let l1 = c(1.6, 0.5);
        let f = build_frame(2, 2, &[l1, cr(1.0)], &[l1, cr(1.0)]).unwrap();
        let p = ParamPoint::new(
            vec![c(0.9, 0.15), c(-0.75, 0.5)],
            vec![c(1.4, 0.25), c(-0.55, -0.5)],
            c(1.9, 0.35),
        );
        let res = duality_residual_at(&f, DualityPair::RationalNablaD, &p, None, None).unwrap();
        assert!(res < 1e-11, "nD residual {res}");
        let tk = RTables::for_space(&f.space_k).unwrap();
        let res = duality_residual_at(&f, DualityPair::ZQ, &p, Some(&tk), None).unwrap();
        assert!(res < 1e-9, "ZQ residual {res}");
    }

    #[test]
    fn br_identity_and_pole_colocation() {
        let f = unit_frame();
        let res = br_residual_at(&f, c(0.83, 0.57)).unwrap();
        assert!(res < 1e-11, "residual {res}");
        // Both sides share the pole at t = −1 on this frame: approaching it,
        // the two sides stay relatively close while their norms blow up.
        // Conditioning of the R solve degrades as 1/|t+1|, so the gate is
        // loose; a pole mismatch would give an O(1) relative residual.
        let near = c(-1.0 + 1e-5, 1e-6);
        let res_near = br_residual_at(&f, near).unwrap();
        assert!(res_near < 1e-4, "relative residual near pole {res_near}");
        let b = b_series(&f.space_k, 1, 2, near).unwrap();
        let scalar = c_on(&f.m, 1, 2, near).unwrap();
        assert!(max_abs(&(b * scalar)) > 1e3, "pole not reached");
        // m_b = 0 block: both sides are the identity.
        let f0 = build_frame(2, 1, &reals(&[2.0]), &reals(&[2.0, 0.0])).unwrap();
        let b = b_series(&f0.space_k, 1, 2, c(0.9, 0.3)).unwrap();
        let s = c_on(&f0.m, 1, 2, c(0.9, 0.3)).unwrap();
        assert!(max_abs(&(b * s - eye(1))) < 1e-14);
    }
}
