//! Highest-weight `gl_k` modules on monomial bases and tensor-product weight
//! spaces indexed by nonnegative integer matrices with fixed row/column sums.
//!
//! A module `V_l` with highest weight `(l, 0, …, 0)` is realized on
//! `C[x_1, …, x_k]` by `e_ab ↦ x_a ∂_b`, the highest-weight vector being
//! `x_1^l`. Basis vectors are stored in the divided-power normalization
//!
//! ```text
//! v_δ = e_21^(δ_2) ⋯ e_k1^(δ_k) · x_1^l ,   y^(s) = y^s / s! ,
//! ```
//!
//! under which single generators act with *integer* coefficients read off the
//! target exponents. Tensor weight spaces `(V_{l_1} ⊗ … ⊗ V_{l_n})[m]` carry
//! the product basis indexed by the lattice of `k × n` matrices `(d_ai)` with
//! column sums `l_i` and row sums `m_a`. Only `l_1` (hence the `(1,1)` entry
//! and `m_1`) may be a non-integer complex number; the `(1,1)` entry is
//! determined by the rest and never stored.

use std::collections::HashMap;

use serde_json::json;

use crate::linalg::{c, complex_to_json, cr, zeros, C64, CMat};
use crate::{CoreError, Result};

const INT_TOL: f64 = 1e-9;

/// Structure constants of `gl_k`: `[e_ab, e_cd] = δ_bc e_ad − δ_ad e_cb`,
/// returned as a list of `((a', b'), sign)` terms. Indices are 1-based.
pub fn glk_commutator(ab: (usize, usize), cd: (usize, usize)) -> Vec<((usize, usize), f64)> {
    let (a, b) = ab;
    let (c_, d) = cd;
    let mut terms = Vec::new();
    if b == c_ {
        terms.push(((a, d), 1.0));
    }
    if a == d {
        terms.push(((c_, b), -1.0));
    }
    terms
}

/// Interpret a complex number as a nonnegative integer when it is one.
pub fn as_nonneg_int(v: C64) -> Option<i64> {
    if v.im.abs() > INT_TOL {
        return None;
    }
    let r = v.re.round();
    if (v.re - r).abs() > INT_TOL || r < -0.5 {
        return None;
    }
    Some(r as i64)
}

fn require_nonneg_int(name: &str, v: C64) -> Result<i64> {
    as_nonneg_int(v).ok_or_else(|| CoreError::NonIntegerWeight {
        name: name.to_string(),
        value: v,
    })
}

// ---------------------------------------------------------------------------
// Single highest-weight module
// ---------------------------------------------------------------------------

/// The module `V_l` of `gl_k` on exponent vectors `(δ_2, …, δ_k)`, divided-power
/// normalized. For integer `l` the basis is complete (`Σδ ≤ l`); for complex
/// `l` it is truncated at total degree `depth`.
#[derive(Debug, Clone)]
pub struct HwModule {
    pub k: usize,
    pub l: C64,
    pub depth: usize,
    basis: Vec<Vec<i64>>,
    index: HashMap<Vec<i64>, usize>,
}

impl HwModule {
    /// Full module for integer highest weight.
    pub fn full(k: usize, l: i64) -> Result<Self> {
        if l < 0 {
            return Err(CoreError::NonIntegerWeight {
                name: "l".into(),
                value: cr(l as f64),
            });
        }
        Self::with_depth(k, cr(l as f64), l as usize)
    }

    /// Module truncated at lowering degree `depth`; required for complex `l`.
    pub fn with_depth(k: usize, l: C64, depth: usize) -> Result<Self> {
        if k == 0 {
            return Err(CoreError::IndexRange("k must be positive".into()));
        }
        let cap = match as_nonneg_int(l) {
            Some(li) => depth.min(li as usize),
            None => depth,
        };
        let mut basis = Vec::new();
        let mut stack = vec![0i64; k - 1];
        enumerate_exponents(&mut basis, &mut stack, 0, cap as i64);
        basis.sort();
        let index = basis
            .iter()
            .enumerate()
            .map(|(i, b)| (b.clone(), i))
            .collect();
        Ok(HwModule {
            k,
            l,
            depth: cap,
            basis,
            index,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn exponents(&self, idx: usize) -> &[i64] {
        &self.basis[idx]
    }

    /// Weight of basis vector `idx`: `(l − Σδ, δ_2, …, δ_k)`.
    pub fn weight(&self, idx: usize) -> Vec<C64> {
        let d = &self.basis[idx];
        let s: i64 = d.iter().sum();
        let mut w = vec![self.l - cr(s as f64)];
        w.extend(d.iter().map(|&x| cr(x as f64)));
        w
    }

    /// Lowering degree (`Σδ`) of basis vector `idx`.
    pub fn level(&self, idx: usize) -> i64 {
        self.basis[idx].iter().sum()
    }

    /// Apply `e_ab` to basis vector `idx`. Returns the target index and the
    /// coefficient, or `None` when the image is zero (or falls outside the
    /// truncation depth). Indices `a, b` are 1-based.
    pub fn apply_gen(&self, a: usize, b: usize, idx: usize) -> Option<(usize, C64)> {
        let d = &self.basis[idx];
        let s: i64 = d.iter().sum();
        if a == b {
            let coeff = if a == 1 {
                self.l - cr(s as f64)
            } else {
                cr(d[a - 2] as f64)
            };
            return Some((idx, coeff));
        }
        // Target exponents: δ' = δ + e_a − e_b on the (2..k) slots.
        let mut t = d.clone();
        if b >= 2 {
            if t[b - 2] == 0 {
                return None;
            }
            t[b - 2] -= 1;
        }
        if a >= 2 {
            t[a - 2] += 1;
        }
        let idx2 = *self.index.get(&t)?;
        let coeff = if a == 1 {
            // target's x_1 exponent = l − Σδ'
            let s2: i64 = t.iter().sum();
            self.l - cr(s2 as f64)
        } else {
            cr(t[a - 2] as f64)
        };
        Some((idx2, coeff))
    }

    /// Position of an exponent vector in the basis.
    pub fn exponents_index(&self, expo: &[i64]) -> Option<usize> {
        self.index.get(expo).copied()
    }

    /// Dense matrix of `e_ab` on the (truncated) module.
    pub fn generator_matrix(&self, a: usize, b: usize) -> CMat {
        let n = self.dim();
        let mut m = zeros(n, n);
        for src in 0..n {
            if let Some((dst, coeff)) = self.apply_gen(a, b, src) {
                m[(dst, src)] += coeff;
            }
        }
        m
    }
}

fn enumerate_exponents(out: &mut Vec<Vec<i64>>, stack: &mut Vec<i64>, pos: usize, budget: i64) {
    if pos == stack.len() {
        out.push(stack.clone());
        return;
    }
    for v in 0..=budget {
        stack[pos] = v;
        enumerate_exponents(out, stack, pos + 1, budget - v);
    }
    stack[pos] = 0;
}

// ---------------------------------------------------------------------------
// Tensor weight space
// ---------------------------------------------------------------------------

/// A basis point of the lattice: all `k·n` exponents except the `(1,1)` entry,
/// stored row-major as integers. The `(1,1)` entry is `l_1 − Σ_{a≥2} d_a1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LatticePoint {
    free: Vec<i64>,
}

impl LatticePoint {
    /// Build a point from its non-`(1,1)` entries (row-major order).
    pub fn from_free(free: Vec<i64>) -> Self {
        LatticePoint { free }
    }

    fn slot(k: usize, n: usize, a: usize, i: usize) -> usize {
        debug_assert!(a >= 1 && a <= k && i >= 1 && i <= n && (a, i) != (1, 1));
        let _ = k;
        (a - 1) * n + (i - 1) - 1
    }

    /// Integer entry at `(a, i)`, 1-based; panics on the `(1,1)` slot.
    pub fn entry(&self, k: usize, n: usize, a: usize, i: usize) -> i64 {
        self.free[Self::slot(k, n, a, i)]
    }
}

/// The weight subspace `(V_{l_1} ⊗ … ⊗ V_{l_n})[m_1, …, m_k]` of `gl_k` with
/// its frozen lattice basis. Dimension 0 is legal.
#[derive(Debug, Clone)]
pub struct TensorWeightSpace {
    pub k: usize,
    pub n: usize,
    pub l: Vec<C64>,
    pub m: Vec<C64>,
    basis: Vec<LatticePoint>,
    index: HashMap<LatticePoint, usize>,
    /// Set when every weight is a nonnegative integer (cross-check fast path).
    pub all_integer: bool,
}

/// Enumerate the lattice of `k × n` nonnegative-integer matrices with column
/// sums `l` and row sums `m` (the `(1,1)` entry may be complex when `l_1` is),
/// ordered lexicographically on the non-`(1,1)` entries read row-major.
pub fn enumerate_basis(k: usize, n: usize, l: &[C64], m: &[C64]) -> Result<TensorWeightSpace> {
    if k == 0 || n == 0 || l.len() != n || m.len() != k {
        return Err(CoreError::IndexRange(format!(
            "expected l of length n={n} and m of length k={k}"
        )));
    }
    let suml: C64 = l.iter().sum();
    let summ: C64 = m.iter().sum();
    if (suml - summ).norm() > INT_TOL {
        return Err(CoreError::WeightSumMismatch(suml, summ));
    }
    let mut li = Vec::with_capacity(n);
    li.push(as_nonneg_int(l[0]));
    for (i, &v) in l.iter().enumerate().skip(1) {
        li.push(Some(require_nonneg_int(&format!("l_{}", i + 1), v)?));
    }
    for (a, &v) in m.iter().enumerate().skip(1) {
        require_nonneg_int(&format!("m_{}", a + 1), v)?;
    }
    let all_integer = li[0].is_some() && as_nonneg_int(m[0]).is_some();

    // Rows a = 2..k are compositions of m_a into n nonnegative parts; row 1 is
    // then forced by the column sums, and its row sum holds automatically.
    let mut rows: Vec<Vec<Vec<i64>>> = Vec::new();
    for a in 2..=k {
        let ma = as_nonneg_int(m[a - 1]).unwrap();
        let mut comps = Vec::new();
        let mut stack = vec![0i64; n];
        compositions(&mut comps, &mut stack, 0, ma);
        rows.push(comps);
    }
    let mut points = Vec::new();
    let mut chosen: Vec<usize> = vec![0; rows.len()];
    collect_points(k, n, &li, &rows, &mut chosen, 0, &mut points);

    // Freeze the ordering: lexicographic on free entries, row-major, (1,1) skipped.
    points.sort_by(|p, q| p.free.cmp(&q.free));
    let index = points
        .iter()
        .enumerate()
        .map(|(i, p)| (p.clone(), i))
        .collect();
    Ok(TensorWeightSpace {
        k,
        n,
        l: l.to_vec(),
        m: m.to_vec(),
        basis: points,
        index,
        all_integer,
    })
}

fn compositions(out: &mut Vec<Vec<i64>>, stack: &mut Vec<i64>, pos: usize, rest: i64) {
    if pos + 1 == stack.len() {
        stack[pos] = rest;
        out.push(stack.clone());
        return;
    }
    for v in 0..=rest {
        stack[pos] = v;
        compositions(out, stack, pos + 1, rest - v);
    }
    stack[pos] = 0;
}

fn collect_points(
    k: usize,
    n: usize,
    li: &[Option<i64>],
    rows: &[Vec<Vec<i64>>],
    chosen: &mut Vec<usize>,
    depth: usize,
    out: &mut Vec<LatticePoint>,
) {
    if depth == rows.len() {
        // Column sums below row 1.
        let mut colsum = vec![0i64; n];
        for (r, &ci) in rows.iter().zip(chosen.iter()) {
            for (i, v) in r[ci].iter().enumerate() {
                colsum[i] += v;
            }
        }
        // Row 1, columns 2..n must be nonnegative integers.
        let mut free = Vec::with_capacity(k * n - 1);
        for i in 2..=n {
            let d1i = match li[i - 1] {
                Some(v) => v - colsum[i - 1],
                None => unreachable!(),
            };
            if d1i < 0 {
                return;
            }
            free.push(d1i);
        }
        // The (1,1) entry: l_1 − Σ_{a≥2} d_a1; constrained only for integer l_1.
        if let Some(l1) = li[0] {
            if l1 - colsum[0] < 0 {
                return;
            }
        }
        for (r, &ci) in rows.iter().zip(chosen.iter()) {
            free.extend_from_slice(&r[ci]);
        }
        out.push(LatticePoint { free });
        return;
    }
    for ci in 0..rows[depth].len() {
        chosen[depth] = ci;
        collect_points(k, n, li, rows, chosen, depth + 1, out);
    }
}

impl TensorWeightSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn points(&self) -> &[LatticePoint] {
        &self.basis
    }

    pub fn position(&self, p: &LatticePoint) -> Option<usize> {
        self.index.get(p).copied()
    }

    /// Entry `d_ai` (1-based) of basis point `idx` as a complex number; the
    /// `(1,1)` entry is computed from `l_1`.
    pub fn entry(&self, idx: usize, a: usize, i: usize) -> C64 {
        if (a, i) == (1, 1) {
            let p = &self.basis[idx];
            let col1: i64 = (2..=self.k).map(|b| p.entry(self.k, self.n, b, 1)).sum();
            self.l[0] - cr(col1 as f64)
        } else {
            cr(self.basis[idx].entry(self.k, self.n, a, i) as f64)
        }
    }

    /// Integer entry where guaranteed (`(a,i) ≠ (1,1)`).
    pub fn entry_int(&self, idx: usize, a: usize, i: usize) -> i64 {
        self.basis[idx].entry(self.k, self.n, a, i)
    }

    /// The space with `m` shifted by the root `α_ab = ε_a − ε_b`.
    pub fn shifted(&self, a: usize, b: usize) -> Result<TensorWeightSpace> {
        let mut m = self.m.clone();
        m[a - 1] += cr(1.0);
        m[b - 1] -= cr(1.0);
        match enumerate_basis(self.k, self.n, &self.l, &m) {
            Ok(s) => Ok(s),
            // A shifted m with a negative integer part means an empty target.
            Err(CoreError::NonIntegerWeight { .. }) => Ok(TensorWeightSpace {
                k: self.k,
                n: self.n,
                l: self.l.clone(),
                m,
                basis: Vec::new(),
                index: HashMap::new(),
                all_integer: false,
            }),
            Err(e) => Err(e),
        }
    }

    /// Apply `e_ab^{(i)}` (single factor, 1-based `i`) to basis vector `idx`,
    /// producing the target point (valued in the `α_ab`-shifted space for
    /// `a ≠ b`) and the divided-power coefficient.
    fn apply_gen_factor(
        &self,
        target: &TensorWeightSpace,
        a: usize,
        b: usize,
        i: usize,
        idx: usize,
    ) -> Option<(usize, C64)> {
        if a == b {
            return Some((idx, self.entry(idx, a, i)));
        }
        let p = &self.basis[idx];
        let mut free = p.free.clone();
        // d' = d + (ε_a − ε_b) in column i; the (1,1) slot is implicit.
        if (b, i) != (1, 1) {
            let s = LatticePoint::slot(self.k, self.n, b, i);
            if free[s] == 0 {
                return None;
            }
            free[s] -= 1;
        }
        if (a, i) != (1, 1) {
            let s = LatticePoint::slot(self.k, self.n, a, i);
            free[s] += 1;
        }
        let q = LatticePoint { free };
        let tid = target.position(&q)?;
        Some((tid, target.entry(tid, a, i)))
    }

    /// Matrix of `e_ab` acting on this space, for a single factor `i` or the
    /// full coproduct sum. Returns the target space (shifted `m` for `a ≠ b`)
    /// together with the matrix mapping this space into it.
    pub fn generator_matrix(&self, a: usize, b: usize, leg: Leg) -> Result<(TensorWeightSpace, CMat)> {
        if a < 1 || a > self.k || b < 1 || b > self.k {
            return Err(CoreError::IndexRange(format!(
                "generator indices ({a},{b}) out of range for k={}",
                self.k
            )));
        }
        if let Leg::Factor(i) = leg {
            if i < 1 || i > self.n {
                return Err(CoreError::IndexRange(format!(
                    "factor index {i} out of range for n={}",
                    self.n
                )));
            }
        }
        let target = if a == b { self.clone() } else { self.shifted(a, b)? };
        let mut mat = zeros(target.dim(), self.dim());
        let legs: Vec<usize> = match leg {
            Leg::Factor(i) => vec![i],
            Leg::Total => (1..=self.n).collect(),
        };
        for src in 0..self.dim() {
            for &i in &legs {
                if let Some((dst, coeff)) = self.apply_gen_factor(&target, a, b, i, src) {
                    mat[(dst, src)] += coeff;
                }
            }
        }
        Ok((target, mat))
    }

    /// Square matrix of the product `e_ab e_ba` (total generators).
    pub fn ee_product_total(&self, a: usize, b: usize) -> Result<CMat> {
        let (mid, down) = self.generator_matrix(b, a, Leg::Total)?;
        let (_, up) = mid.generator_matrix(a, b, Leg::Total)?;
        Ok(up * down)
    }

    /// Casimir-type operator `Σ e_ab^{(i)} e_ba^{(j)}` on the space:
    /// the full tensor `Ω`, or its triangular halves `Ω₊`/`Ω₋`.
    pub fn casimir_matrix(&self, i: usize, j: usize, variant: CasimirVariant) -> Result<CMat> {
        if i == j || i < 1 || j < 1 || i > self.n || j > self.n {
            return Err(CoreError::IndexRange(format!(
                "casimir legs ({i},{j}) invalid for n={}",
                self.n
            )));
        }
        let dim = self.dim();
        let mut acc = zeros(dim, dim);
        let mut add_term = |space: &Self, a: usize, b: usize, w: f64| -> Result<()> {
            // e_ab^{(i)} e_ba^{(j)}
            let (mid, first) = space.generator_matrix(b, a, Leg::Factor(j))?;
            let (_, second) = mid.generator_matrix(a, b, Leg::Factor(i))?;
            acc += (second * first) * cr(w);
            Ok(())
        };
        match variant {
            CasimirVariant::Full => {
                for a in 1..=self.k {
                    for b in 1..=self.k {
                        add_term(self, a, b, 1.0)?;
                    }
                }
            }
            CasimirVariant::Plus => {
                for a in 1..=self.k {
                    add_term(self, a, a, 0.5)?;
                }
                for a in 1..=self.k {
                    for b in (a + 1)..=self.k {
                        add_term(self, a, b, 1.0)?;
                    }
                }
            }
            CasimirVariant::Minus => {
                for a in 1..=self.k {
                    add_term(self, a, a, 0.5)?;
                }
                for a in 1..=self.k {
                    for b in (a + 1)..=self.k {
                        add_term(self, b, a, 1.0)?;
                    }
                }
            }
        }
        Ok(acc)
    }

    /// Per-factor column exponents `(d_1i, …, d_ki)` of basis vector `idx`.
    pub fn column(&self, idx: usize, i: usize) -> Vec<C64> {
        (1..=self.k).map(|a| self.entry(idx, a, i)).collect()
    }

    /// Local exponent vector `(d_2i, …, d_ki)` of factor `i` (integers).
    pub fn local_exponents(&self, idx: usize, i: usize) -> Vec<i64> {
        (2..=self.k).map(|a| self.entry_int(idx, a, i)).collect()
    }

    /// JSON descriptor: `{k, n, l, m, basis}` with complex numbers as
    /// `[re, im]` pairs; the `(1,1)` basis entry is emitted in the same form.
    pub fn descriptor_json(&self) -> serde_json::Value {
        let cx = |v: &[C64]| -> Vec<serde_json::Value> { v.iter().map(|&x| complex_to_json(x)).collect() };
        let basis: Vec<serde_json::Value> = (0..self.dim())
            .map(|idx| {
                let rows: Vec<serde_json::Value> = (1..=self.k)
                    .map(|a| {
                        let row: Vec<serde_json::Value> = (1..=self.n)
                            .map(|i| complex_to_json(self.entry(idx, a, i)))
                            .collect();
                        serde_json::Value::Array(row)
                    })
                    .collect();
                serde_json::Value::Array(rows)
            })
            .collect();
        json!({
            "k": self.k,
            "n": self.n,
            "l": cx(&self.l),
            "m": cx(&self.m),
            "basis": basis,
        })
    }
}

/// Which tensor leg a generator acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Leg {
    Factor(usize),
    Total,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CasimirVariant {
    Full,
    Plus,
    Minus,
}

/// Convenience: weights from real parts.
pub fn reals(vs: &[f64]) -> Vec<C64> {
    vs.iter().map(|&v| cr(v)).collect()
}

/// Convenience: a complex weight.
pub fn cw(re: f64, im: f64) -> C64 {
    c(re, im)
}
