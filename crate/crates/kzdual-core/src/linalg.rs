//! Dense complex matrix helpers on top of `nalgebra`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{CoreError, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn zeros(rows: usize, cols: usize) -> CMat {
    CMat::zeros(rows, cols)
}

/// Largest entry modulus; 0 for empty matrices.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// The residual metric used by every report in the crate:
/// `max |L − R| / (1 + max |L|)` entrywise.
pub fn rel_residual(lhs: &CMat, rhs: &CMat) -> f64 {
    debug_assert_eq!(lhs.shape(), rhs.shape());
    let diff = max_abs(&(lhs - rhs));
    diff / (1.0 + max_abs(lhs))
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

/// Solve `A · X = B` for square `A` by LU with partial pivoting.
pub fn solve_square(a: &CMat, b: &CMat) -> Result<CMat> {
    if a.nrows() == 0 {
        return Ok(zeros(0, b.ncols()));
    }
    a.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| CoreError::LinearSolve(format!("singular {}x{} system", a.nrows(), a.ncols())))
}

pub fn inverse(a: &CMat) -> Result<CMat> {
    solve_square(a, &eye(a.nrows()))
}

/// Least-squares solve of `R · X = Y` for `R` (normal equations on the right):
/// `R = Y Xᴴ (X Xᴴ)⁻¹`. `X` must have full row rank.
pub fn lstsq_right(y: &CMat, x: &CMat) -> Result<CMat> {
    let xh = x.adjoint();
    let gram = x * &xh;
    let rhs = y * &xh;
    // R gram = rhs  =>  gramᵀ Rᵀ = rhsᵀ
    let rt = solve_square(&gram.transpose(), &rhs.transpose())?;
    Ok(rt.transpose())
}

/// Serialize a matrix as rows of `[re, im]` pairs.
pub fn mat_to_json(m: &CMat) -> serde_json::Value {
    let rows: Vec<serde_json::Value> = (0..m.nrows())
        .map(|r| {
            let row: Vec<serde_json::Value> = (0..m.ncols())
                .map(|c| serde_json::json!([m[(r, c)].re, m[(r, c)].im]))
                .collect();
            serde_json::Value::Array(row)
        })
        .collect();
    serde_json::Value::Array(rows)
}

pub fn complex_to_json(v: C64) -> serde_json::Value {
    serde_json::json!([v.re, v.im])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_roundtrip() {
        let a = CMat::from_row_slice(2, 2, &[c(1.0, 0.5), cr(2.0), cr(0.0), c(0.0, -1.0)]);
        let b = CMat::from_row_slice(2, 1, &[cr(1.0), cr(1.0)]);
        let x = solve_square(&a, &b).unwrap();
        assert!(max_abs(&(&a * &x - &b)) < 1e-13);
    }

    #[test]
    fn lstsq_recovers_exact_solution() {
        // R (2x2) acting on a 2x3 X of full row rank.
        let r = CMat::from_row_slice(2, 2, &[cr(1.0), c(0.0, 1.0), cr(-0.5), cr(2.0)]);
        let x = CMat::from_row_slice(2, 3, &[cr(1.0), cr(0.0), cr(1.0), cr(0.0), cr(1.0), cr(-1.0)]);
        let y = &r * &x;
        let rec = lstsq_right(&y, &x).unwrap();
        assert!(max_abs(&(rec - r)) < 1e-12);
    }
}
