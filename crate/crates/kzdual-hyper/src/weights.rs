//! Weight functions selecting basis coordinates of the integral solutions:
//! the rational `w_d`, the shifted-rational `ŵ_d`, and the trigonometric
//! `W_d` (built from `sin(π·/κ)` kernels). All are symmetrizations over the
//! `r!` orderings of the integration variables; `r ≤ 3` is enforced.

use kzdual_core::linalg::{cr, C64};

use crate::gamma::sink;
use crate::{HyperError, Result};

pub const MAX_SYM_VARS: usize = 3;

/// All permutations of `0..r` in lexicographic order (r ≤ 3).
fn permutations(r: usize) -> Vec<Vec<usize>> {
    let mut perms = vec![vec![]];
    for _ in 0..r {
        let mut next = Vec::new();
        for p in &perms {
            for v in 0..r {
                if !p.contains(&v) {
                    let mut q = p.clone();
                    q.push(v);
                    next.push(q);
                }
            }
        }
        perms = next;
    }
    perms
}

fn check_r(r: usize) -> Result<()> {
    if r > MAX_SYM_VARS {
        return Err(HyperError::Region(format!(
            "symmetrization over {r}! orderings exceeds the r ≤ {MAX_SYM_VARS} desk gate"
        )));
    }
    Ok(())
}

/// Offsets `d_{<i} = Σ_{j<i} d_j`.
pub fn offsets(d: &[i64]) -> Vec<i64> {
    let mut out = Vec::with_capacity(d.len());
    let mut acc = 0;
    for &di in d {
        out.push(acc);
        acc += di;
    }
    out
}

/// Rational weight function
/// `w_d = Sym ∏_i ∏_{a=1}^{d_i} 1/(t_{a+d_{<i}} − z_i)`.
pub fn w_rational(d: &[i64], t: &[C64], z: &[C64]) -> Result<C64> {
    let r: i64 = d.iter().sum();
    debug_assert_eq!(r as usize, t.len());
    check_r(t.len())?;
    let offs = offsets(d);
    let mut acc = cr(0.0);
    for perm in permutations(t.len()) {
        let mut term = cr(1.0);
        for (i, &di) in d.iter().enumerate() {
            for a in 0..di {
                let slot = (a + offs[i]) as usize;
                let den = t[perm[slot]] - z[i];
                if den.norm() < 1e-14 {
                    return Err(HyperError::Singular(format!("t = z_{}", i + 1)));
                }
                term /= den;
            }
        }
        acc += term;
    }
    Ok(acc)
}

/// Shifted-rational weight function
/// `ŵ_d = ∏_{a<b} (t_a−t_b)/(t_a−t_b−1) × Sym[ ∏_j ∏_a ( 1/(t−z_j+l_j)
/// ∏_{p<j} (t−z_p)/(t−z_p+l_p) ) ∏_{a<b} (t_a−t_b−1)/(t_a−t_b) ]`.
pub fn w_shifted(d: &[i64], t: &[C64], z: &[C64], l: &[C64]) -> Result<C64> {
    check_r(t.len())?;
    let offs = offsets(d);
    let r = t.len();
    let mut pre = cr(1.0);
    for a in 0..r {
        for b in (a + 1)..r {
            pre *= (t[a] - t[b]) / (t[a] - t[b] - cr(1.0));
        }
    }
    let mut acc = cr(0.0);
    for perm in permutations(r) {
        let tp: Vec<C64> = perm.iter().map(|&p| t[p]).collect();
        let mut term = cr(1.0);
        for (j, &dj) in d.iter().enumerate() {
            for a in 0..dj {
                let ta = tp[(a + offs[j]) as usize];
                term /= ta - z[j] + l[j];
                for p in 0..j {
                    term *= (ta - z[p]) / (ta - z[p] + l[p]);
                }
            }
        }
        for a in 0..r {
            for b in (a + 1)..r {
                term *= (tp[a] - tp[b] - cr(1.0)) / (tp[a] - tp[b]);
            }
        }
        acc += term;
    }
    Ok(pre * acc)
}

/// Trigonometric weight function: the shifted-rational pattern with linear
/// factors replaced by `sin(π·/κ)` and an exponential prefactor per variable.
pub fn w_trig(d: &[i64], t: &[C64], z: &[C64], l: &[C64], kappa: C64) -> Result<C64> {
    check_r(t.len())?;
    let offs = offsets(d);
    let r = t.len();
    let mut pre = cr(1.0);
    for a in 0..r {
        for b in (a + 1)..r {
            pre *= sink(t[a] - t[b], kappa) / sink(t[a] - t[b] - cr(1.0), kappa);
        }
    }
    let i_pi = C64::new(0.0, std::f64::consts::PI);
    let mut acc = cr(0.0);
    for perm in permutations(r) {
        let tp: Vec<C64> = perm.iter().map(|&p| t[p]).collect();
        let mut term = cr(1.0);
        for (j, &dj) in d.iter().enumerate() {
            for a in 0..dj {
                let ta = tp[(a + offs[j]) as usize];
                term *= (i_pi * (z[j] - ta) / kappa).exp() / sink(ta - z[j] + l[j], kappa);
                for p in 0..j {
                    term *= sink(ta - z[p], kappa) / sink(ta - z[p] + l[p], kappa);
                }
            }
        }
        for a in 0..r {
            for b in (a + 1)..r {
                term *= sink(tp[a] - tp[b] - cr(1.0), kappa) / sink(tp[a] - tp[b], kappa);
            }
        }
        acc += term;
    }
    Ok(pre * acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use kzdual_core::linalg::c;

    #[test]
    fn rational_one_loop() {
        // n = 1, d = (1): w = 1/(t − z1).
        let t = [c(1.3, 0.4)];
        let z = [c(0.2, -0.1)];
        let got = w_rational(&[1], &t, &z).unwrap();
        assert!((got - cr(1.0) / (t[0] - z[0])).norm() < 1e-15);
    }

    #[test]
    fn rational_two_loops_symmetrized() {
        // n = 2, d = (1,1): w = 1/((t1−z1)(t2−z2)) + 1/((t2−z1)(t1−z2)).
        let t = [c(1.3, 0.4), c(-0.8, 0.9)];
        let z = [c(0.2, -0.1), c(-0.3, 0.5)];
        let got = w_rational(&[1, 1], &t, &z).unwrap();
        let expect = cr(1.0) / ((t[0] - z[0]) * (t[1] - z[1]))
            + cr(1.0) / ((t[1] - z[0]) * (t[0] - z[1]));
        assert!((got - expect).norm() < 1e-15);
    }

    #[test]
    fn empty_d_is_one() {
        let z = [c(0.2, -0.1)];
        assert_eq!(w_rational(&[0], &[], &z).unwrap(), cr(1.0));
        assert_eq!(w_shifted(&[0], &[], &z, &[cr(1.0)]).unwrap(), cr(1.0));
        assert_eq!(
            w_trig(&[0], &[], &z, &[cr(1.0)], cr(2.0)).unwrap(),
            cr(1.0)
        );
    }

    #[test]
    fn rational_weight_is_symmetric() {
        let t = [c(1.3, 0.4), c(-0.8, 0.9)];
        let ts = [t[1], t[0]];
        let z = [c(0.2, -0.1), c(-0.3, 0.5)];
        for d in [[1i64, 1], [2, 0], [0, 2]] {
            let a = w_rational(&d, &t, &z).unwrap();
            let b = w_rational(&d, &ts, &z).unwrap();
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn shifted_and_trig_single_variable_values() {
        // n = 1, d = (1): ŵ = 1/(t − z1 + l1); W = e^{πi(z1−t)/κ}/sink(t−z1+l1).
        let t = [c(1.3, 0.4)];
        let z = [c(0.2, -0.1)];
        let l = [c(1.7, 0.2)];
        let kappa = cr(1.9);
        let got = w_shifted(&[1], &t, &z, &l).unwrap();
        assert!((got - cr(1.0) / (t[0] - z[0] + l[0])).norm() < 1e-15);
        let got = w_trig(&[1], &t, &z, &l, kappa).unwrap();
        let i_pi = C64::new(0.0, std::f64::consts::PI);
        let expect = (i_pi * (z[0] - t[0]) / kappa).exp() / sink(t[0] - z[0] + l[0], kappa);
        assert!((got - expect).norm() < 1e-15);
        // The §8 two-point shape: ŵ for d = (0,1) picks up the p < j ratio.
        let z2 = [c(0.2, -0.1), c(-0.3, 0.5)];
        let l2 = [c(1.7, 0.2), cr(1.0)];
        let got = w_shifted(&[0, 1], &t, &z2, &l2).unwrap();
        let expect = cr(1.0) / (t[0] - z2[1] + l2[1]) * (t[0] - z2[0]) / (t[0] - z2[0] + l2[0]);
        assert!((got - expect).norm() < 1e-15);
    }

    #[test]
    fn sym_gate() {
        let t = vec![cr(1.0); 4];
        let z = [cr(0.0)];
        assert!(w_rational(&[4], &t, &z).is_err());
    }
}
