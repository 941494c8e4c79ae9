//! Rational Yangian R-matrices `R_{VW}(t)` for pairs of highest-weight
//! `gl_k` modules of shape `(l, 0, …, 0)`, constructed numerically.
//!
//! The R-matrix is pinned down by three facts:
//!
//! * invariance: `[R(t), g ⊗ 1 + 1 ⊗ g] = 0` for every `g ∈ gl_k`,
//! * the commutation relation
//!   `R(t)(t e_ab ⊗ 1 + Σ_c e_ac ⊗ e_cb) = (t e_ab ⊗ 1 + Σ_c e_cb ⊗ e_ac) R(t)`,
//! * normalization `R(t) v ⊗ w = v ⊗ w` on the highest-weight line.
//!
//! Invariance under the Cartans makes `R` block-diagonal over joint weights.
//! Blocks are solved level by level: the lowering relations (`g = e_a1` and
//! the commutation relation for `(a, 1)`) express each level-(ℓ+1) block
//! linearly in terms of level-ℓ blocks; a least-squares solve inverts them.
//! The remaining relations (raising and level-preserving) are then evaluated
//! as a residual gate, so a non-generic `t` is reported rather than silently
//! accepted.

use std::collections::BTreeMap;

use crate::glk::{HwModule, TensorWeightSpace};
use crate::linalg::{cr, lstsq_right, max_abs, zeros, C64, CMat};
use crate::{CoreError, Result};

/// Residual gate for the verification pass after the blockwise solve.
const R_RESIDUAL_GATE: f64 = 1e-10;

/// Block key: the joint weight components `(w_2, …, w_k)` of a pair
/// `(δ, ε)`, i.e. `w_a = δ_a + ε_a`. The level is `Σ w_a` and the first
/// weight component is `p + q − level`.
pub type BlockKey = Vec<i64>;

/// Basis/bookkeeping for `V_p ⊗ V_q` up to a lowering level; `eval(t)`
/// produces the weight-block matrices of `R_{V_p V_q}(t)`.
#[derive(Debug, Clone)]
pub struct RMatrixTable {
    pub k: usize,
    pub hw_left: C64,
    pub hw_right: C64,
    pub depth: usize,
    left: HwModule,
    right: HwModule,
    /// pairs (left index, right index) per block, in deterministic order
    blocks: BTreeMap<BlockKey, Vec<(usize, usize)>>,
}

/// The solved R-matrix at one value of `t`: one dense matrix per weight
/// block, rows/columns indexed by the table's pair lists.
#[derive(Debug, Clone)]
pub struct REval {
    pub t: C64,
    pub blocks: BTreeMap<BlockKey, CMat>,
}

impl RMatrixTable {
    /// Table for `R_{V_p V_q}` solved through lowering level `depth`.
    pub fn new(k: usize, hw_left: C64, hw_right: C64, depth: usize) -> Result<Self> {
        let left = HwModule::with_depth(k, hw_left, depth)?;
        let right = HwModule::with_depth(k, hw_right, depth)?;
        let mut blocks: BTreeMap<BlockKey, Vec<(usize, usize)>> = BTreeMap::new();
        for i1 in 0..left.dim() {
            for i2 in 0..right.dim() {
                let lv = left.level(i1) + right.level(i2);
                if lv as usize > depth {
                    continue;
                }
                let key: BlockKey = left
                    .exponents(i1)
                    .iter()
                    .zip(right.exponents(i2))
                    .map(|(a, b)| a + b)
                    .collect();
                blocks.entry(key).or_default().push((i1, i2));
            }
        }
        Ok(RMatrixTable {
            k,
            hw_left,
            hw_right,
            depth,
            left,
            right,
            blocks,
        })
    }

    pub fn block_pairs(&self, key: &BlockKey) -> Option<&[(usize, usize)]> {
        self.blocks.get(key).map(|v| v.as_slice())
    }

    pub fn block_keys(&self) -> impl Iterator<Item = &BlockKey> {
        self.blocks.keys()
    }

    /// Matrix of `Σ_terms coeff · (op1 ⊗ op2)` from block `src` to block `dst`;
    /// `None` on either side means the identity.
    #[allow(clippy::type_complexity)]
    fn pair_matrix(
        &self,
        terms: &[(C64, Option<(usize, usize)>, Option<(usize, usize)>)],
        src: &BlockKey,
        dst: &BlockKey,
    ) -> CMat {
        let sp = &self.blocks[src];
        let dp = &self.blocks[dst];
        let dpos: BTreeMap<(usize, usize), usize> =
            dp.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        let mut m = zeros(dp.len(), sp.len());
        for (col, &(i1, i2)) in sp.iter().enumerate() {
            for &(coeff, op1, op2) in terms {
                let (j1, c1) = match op1 {
                    None => (i1, cr(1.0)),
                    Some((a, b)) => match self.left.apply_gen(a, b, i1) {
                        Some(x) => x,
                        None => continue,
                    },
                };
                let (j2, c2) = match op2 {
                    None => (i2, cr(1.0)),
                    Some((a, b)) => match self.right.apply_gen(a, b, i2) {
                        Some(x) => x,
                        None => continue,
                    },
                };
                if let Some(&row) = dpos.get(&(j1, j2)) {
                    m[(row, col)] += coeff * c1 * c2;
                }
            }
        }
        m
    }

    fn total_gen_terms(a: usize, b: usize) -> Vec<(C64, Option<(usize, usize)>, Option<(usize, usize)>)> {
        vec![(cr(1.0), Some((a, b)), None), (cr(1.0), None, Some((a, b)))]
    }

    fn rdef_lhs_terms(
        &self,
        t: C64,
        a: usize,
        b: usize,
    ) -> Vec<(C64, Option<(usize, usize)>, Option<(usize, usize)>)> {
        let mut terms = vec![(t, Some((a, b)), None)];
        for c_ in 1..=self.k {
            terms.push((cr(1.0), Some((a, c_)), Some((c_, b))));
        }
        terms
    }

    fn rdef_rhs_terms(
        &self,
        t: C64,
        a: usize,
        b: usize,
    ) -> Vec<(C64, Option<(usize, usize)>, Option<(usize, usize)>)> {
        let mut terms = vec![(t, Some((a, b)), None)];
        for c_ in 1..=self.k {
            terms.push((cr(1.0), Some((c_, b)), Some((a, c_))));
        }
        terms
    }

    /// Solve the weight-block matrices of `R(t)` and verify the relations not
    /// used in the construction.
    pub fn eval(&self, t: C64) -> Result<REval> {
        let key_level = |key: &BlockKey| -> usize { key.iter().sum::<i64>() as usize };
        let mut solved: BTreeMap<BlockKey, CMat> = BTreeMap::new();
        // Level 0: the highest-weight line, normalized to the identity.
        let root: BlockKey = vec![0; self.k - 1];
        if !self.blocks.contains_key(&root) {
            return Err(CoreError::RBlockSingular {
                block: "root".into(),
                t,
                detail: "highest-weight block missing".into(),
            });
        }
        solved.insert(root, CMat::identity(1, 1));

        for level in 1..=self.depth {
            let keys: Vec<BlockKey> = self
                .blocks
                .keys()
                .filter(|k| key_level(k) == level)
                .cloned()
                .collect();
            for key in keys {
                let dim = self.blocks[&key].len();
                // Stack lowering relations from all parent blocks.
                let mut xs: Vec<CMat> = Vec::new();
                let mut ys: Vec<CMat> = Vec::new();
                for a in 2..=self.k {
                    if key[a - 2] == 0 {
                        continue;
                    }
                    let mut parent = key.clone();
                    parent[a - 2] -= 1;
                    let rsrc = match solved.get(&parent) {
                        Some(r) => r.clone(),
                        None => continue,
                    };
                    let g = self.pair_matrix(&Self::total_gen_terms(a, 1), &parent, &key);
                    let l = self.pair_matrix(&self.rdef_lhs_terms(t, a, 1), &parent, &key);
                    let lp = self.pair_matrix(&self.rdef_rhs_terms(t, a, 1), &parent, &key);
                    ys.push(&g * &rsrc);
                    xs.push(g);
                    ys.push(lp * &rsrc);
                    xs.push(l);
                }
                if xs.is_empty() {
                    return Err(CoreError::RBlockSingular {
                        block: format!("{key:?}"),
                        t,
                        detail: "no parent blocks".into(),
                    });
                }
                let cols: usize = xs.iter().map(|m| m.ncols()).sum();
                let mut x = zeros(dim, cols);
                let mut y = zeros(dim, cols);
                let mut at = 0;
                for (xi, yi) in xs.iter().zip(&ys) {
                    x.view_mut((0, at), (dim, xi.ncols())).copy_from(xi);
                    y.view_mut((0, at), (dim, yi.ncols())).copy_from(yi);
                    at += xi.ncols();
                }
                let r = lstsq_right(&y, &x).map_err(|e| CoreError::RBlockSingular {
                    block: format!("{key:?}"),
                    t,
                    detail: e.to_string(),
                })?;
                solved.insert(key, r);
            }
        }

        // Verification: every invariance/commutation relation whose source and
        // target blocks were solved must hold.
        let mut worst = 0.0f64;
        let mut worst_block = String::new();
        for (src, rsrc) in &solved {
            for a in 1..=self.k {
                for b in 1..=self.k {
                    if a == b {
                        continue;
                    }
                    let mut dst = src.clone();
                    if a >= 2 {
                        dst[a - 2] += 1;
                    }
                    if b >= 2 {
                        if dst[b - 2] == 0 {
                            continue;
                        }
                        dst[b - 2] -= 1;
                    }
                    let rdst = match solved.get(&dst) {
                        Some(r) => r,
                        None => continue,
                    };
                    let scale = 1.0 + max_abs(rsrc).max(max_abs(rdst)) * (1.0 + t.norm());
                    let g = self.pair_matrix(&Self::total_gen_terms(a, b), src, &dst);
                    let res = max_abs(&(rdst * &g - &g * rsrc)) / scale;
                    let l = self.pair_matrix(&self.rdef_lhs_terms(t, a, b), src, &dst);
                    let lp = self.pair_matrix(&self.rdef_rhs_terms(t, a, b), src, &dst);
                    let res2 = max_abs(&(rdst * &l - &lp * rsrc)) / scale;
                    for r in [res, res2] {
                        if r > worst {
                            worst = r;
                            worst_block = format!("{src:?}->{dst:?} (a={a},b={b})");
                        }
                    }
                }
                // Diagonal commutation relation (a = b), level preserving.
                let l = self.pair_matrix(&self.rdef_lhs_terms(t, a, a), src, src);
                let lp = self.pair_matrix(&self.rdef_rhs_terms(t, a, a), src, src);
                let scale = 1.0 + max_abs(rsrc) * (1.0 + t.norm());
                let res = max_abs(&(rsrc * &l - &lp * rsrc)) / scale;
                if res > worst {
                    worst = res;
                    worst_block = format!("{src:?} (diag a={a})");
                }
            }
        }
        if worst > R_RESIDUAL_GATE {
            return Err(CoreError::RBlockSingular {
                block: worst_block,
                t,
                detail: format!("verification residual {worst:.3e} exceeds {R_RESIDUAL_GATE:.0e}"),
            });
        }
        Ok(REval { t, blocks: solved })
    }

    /// Index of a pair `(δ_left, δ_right)` within its block.
    pub fn pair_position(&self, key: &BlockKey, pair: (usize, usize)) -> Option<usize> {
        self.blocks.get(key)?.iter().position(|&p| p == pair)
    }

    pub fn left_module(&self) -> &HwModule {
        &self.left
    }

    pub fn right_module(&self) -> &HwModule {
        &self.right
    }
}

/// Assemble `(R_{W_u W_v}(t))^{(uv)}` as a square matrix on a tensor weight
/// space: `R` acts on the local exponents of factors `u ≠ v` and leaves the
/// other factors alone.
pub fn r_factor_on_space(
    space: &TensorWeightSpace,
    table: &RMatrixTable,
    u: usize,
    v: usize,
    t: C64,
) -> Result<CMat> {
    let reval = table.eval(t)?;
    apply_r_eval(space, table, &reval, u, v)
}

/// As `r_factor_on_space` but reusing an already solved `REval`.
pub fn apply_r_eval(
    space: &TensorWeightSpace,
    table: &RMatrixTable,
    reval: &REval,
    u: usize,
    v: usize,
) -> Result<CMat> {
    let dim = space.dim();
    let k = space.k;
    let mut out = zeros(dim, dim);
    for col in 0..dim {
        let du = space.local_exponents(col, u);
        let dv = space.local_exponents(col, v);
        let key: BlockKey = du.iter().zip(&dv).map(|(a, b)| a + b).collect();
        let pairs = table.block_pairs(&key).ok_or_else(|| {
            CoreError::IndexRange(format!("R block {key:?} outside table depth {}", table.depth))
        })?;
        let iu = table
            .left_module()
            .exponents_index(&du)
            .ok_or_else(|| CoreError::IndexRange(format!("left exponents {du:?}")))?;
        let iv = table
            .right_module()
            .exponents_index(&dv)
            .ok_or_else(|| CoreError::IndexRange(format!("right exponents {dv:?}")))?;
        let pos = table
            .pair_position(&key, (iu, iv))
            .ok_or_else(|| CoreError::IndexRange("pair missing in block".into()))?;
        let rb = &reval.blocks[&key];
        for (row_pos, &(j1, j2)) in pairs.iter().enumerate() {
            let val = rb[(row_pos, pos)];
            if val.norm() == 0.0 {
                continue;
            }
            // Rewrite the lattice point with the new local exponents.
            let e1 = table.left_module().exponents(j1);
            let e2 = table.right_module().exponents(j2);
            let mut free: Vec<i64> = Vec::with_capacity(k * space.n - 1);
            for a in 1..=k {
                for i in 1..=space.n {
                    if (a, i) == (1, 1) {
                        continue;
                    }
                    let val = if i == u {
                        local_entry(space, &e1, a, u)
                    } else if i == v {
                        local_entry(space, &e2, a, v)
                    } else {
                        space.entry_int(col, a, i)
                    };
                    free.push(val);
                }
            }
            let row = space
                .position(&crate::glk::LatticePoint::from_free(free))
                .ok_or_else(|| CoreError::IndexRange("R image outside weight space".into()))?;
            out[(row, col)] += val;
        }
    }
    Ok(out)
}

/// Entry `d_{a,i}` of a column whose local exponents (rows 2..k) are `expo`;
/// row 1 carries `l_i − Σ expo`.
fn local_entry(space: &TensorWeightSpace, expo: &[i64], a: usize, i: usize) -> i64 {
    if a == 1 {
        let li = space.l[i - 1].re.round() as i64;
        li - expo.iter().sum::<i64>()
    } else {
        expo[a - 2]
    }
}
