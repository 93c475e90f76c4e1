//! Simonenko presymbols and symbols as a covariant transform.
//!
//! With the fiducial operator `F(A) = P_e A P_e` the presymbol is
//!
//! ```text
//! Ŝ_A(l; r) = P_e π(l⁻¹) A π(r) P_e,      S_A(s) = Ŝ_A(s; s),
//! ```
//!
//! stored as a `w × w` block on the window points. For a dyadic scale
//! `t < 1` only window points `ξ` whose image `g·τ_t(ξ)` is a lattice point
//! are resolved; the remaining rows and columns of the block are zero.

use std::collections::HashMap;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::function_space::{GridSpec, RegionMask};
use crate::group::{GroupElement, ScaledElement};
use crate::operator::{
    largest_singular_value, projection_matrix, proxy_of, transform_mask, OperatorMatrix,
    WindowSpec,
};
use crate::representation::{act_matrix, double_act, is_dyadic, ActionMatrix, RepParams};

/// `(L A R)` restricted to `rows × cols`, for sparse `L`, `R`.
fn sandwich_block(
    l: &ActionMatrix,
    a: &DMatrix<f64>,
    r_cols: &[Vec<(usize, f64)>],
    rows: &[usize],
    cols: &[usize],
    factor: f64,
) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| {
        let mut acc = 0.0;
        for &(k, c) in l.row(rows[i]) {
            for &(q, d) in &r_cols[cols[j]] {
                acc += c * a[(k, q)] * d;
            }
        }
        factor * acc
    })
}

/// `Ŝ_A(left; right)` as a window block.
pub fn presymbol(
    a: &OperatorMatrix,
    left: &ScaledElement,
    right: &ScaledElement,
    window: &WindowSpec,
    p: f64,
) -> Result<DMatrix<f64>> {
    a.grid.ensure_same(&window.mask.grid)?;
    let params = RepParams::new(&a.grid, p);
    let group = a.grid.group;
    let l = act_matrix(&params, &group.scaled_inverse(left)?)?;
    let r = act_matrix(&params, right)?;
    let win = window.indices();
    Ok(sandwich_block(&l, &a.entries, &r.columns(), &win, &win, l.joint_factor(&r)))
}

/// `S̃_A(left; right) = P_{F_left} A P_{F_right}` as a full-size operator.
pub fn alt_presymbol(
    a: &OperatorMatrix,
    left: &ScaledElement,
    right: &ScaledElement,
    window: &WindowSpec,
) -> Result<OperatorMatrix> {
    let fl = projection_matrix(&transform_mask(left, &window.mask)?.mask);
    let fr = projection_matrix(&transform_mask(right, &window.mask)?.mask);
    fl.compose(a)?.compose(&fr)
}

/// Window block of `double_act(left, right, X)`; converts the alternative
/// presymbol into the presymbol: `Ŝ_A(l; r) = P_e π(l⁻¹) S̃_A(l; r) π(r) P_e`.
pub fn window_double_act(
    x: &OperatorMatrix,
    left: &ScaledElement,
    right: &ScaledElement,
    window: &WindowSpec,
    p: f64,
) -> Result<DMatrix<f64>> {
    let params = RepParams::new(&x.grid, p);
    let full = double_act(&params, left, right, x)?;
    let win = window.indices();
    Ok(full.block(&win, &win))
}

/// `S_A(s) = Ŝ_A(s; s)`.
pub fn symbol(
    a: &OperatorMatrix,
    s: &ScaledElement,
    window: &WindowSpec,
    p: f64,
) -> Result<DMatrix<f64>> {
    presymbol(a, s, s, window, p)
}

/// Symbol samples over a lattice of scales and base points.
#[derive(Debug, Clone)]
pub struct SymbolField {
    pub window: WindowSpec,
    pub t_levels: Vec<f64>,
    pub lattice: Vec<GroupElement>,
    /// `blocks[level][lattice index]`, each `w × w`.
    pub blocks: Vec<Vec<DMatrix<f64>>>,
    pub p: f64,
}

impl SymbolField {
    pub fn block(&self, level: usize, g: usize) -> &DMatrix<f64> {
        &self.blocks[level][g]
    }

    pub fn window_size(&self) -> usize {
        self.window.size()
    }
}

pub(crate) fn check_levels(t_levels: &[f64]) -> Result<()> {
    if t_levels.is_empty() {
        return invalid("at least one t-level is required");
    }
    if t_levels.iter().any(|&t| !is_dyadic(t) || t > 1.0) {
        return invalid("t-levels must be dyadic and at most 1");
    }
    if t_levels.windows(2).any(|w| w[1] >= w[0]) {
        return invalid("t-levels must be strictly decreasing");
    }
    Ok(())
}

/// Evaluates `S_A(t,g)` on every `(t,g)` of the lattice; blocks are computed
/// in parallel and stored in lattice order.
pub fn symbol_field(
    a: &OperatorMatrix,
    window: &WindowSpec,
    t_levels: &[f64],
    lattice: &[GroupElement],
    p: f64,
) -> Result<SymbolField> {
    check_levels(t_levels)?;
    let jobs: Vec<(usize, usize)> = (0..t_levels.len())
        .flat_map(|i| (0..lattice.len()).map(move |j| (i, j)))
        .collect();
    let flat: Vec<DMatrix<f64>> = jobs
        .par_iter()
        .map(|&(i, j)| {
            let s = ScaledElement::new(t_levels[i], lattice[j].clone())?;
            symbol(a, &s, window, p)
        })
        .collect::<Result<_>>()?;
    let mut it = flat.into_iter();
    let blocks = (0..t_levels.len())
        .map(|_| it.by_ref().take(lattice.len()).collect())
        .collect();
    Ok(SymbolField {
        window: window.clone(),
        t_levels: t_levels.to_vec(),
        lattice: lattice.to_vec(),
        blocks,
        p,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub point: GroupElement,
    pub t_levels: Vec<f64>,
    pub decay: Vec<f64>,
    pub verdict: bool,
    pub tolerance: f64,
    pub rank: usize,
}

/// Relative slack allowed when checking that the decay is non-increasing.
pub const MONOTONE_SLACK: f64 = 0.10;

/// Tests `A ∼_g B` via `σ_{rank+1}(S_{A−B}(t,g))` along the t-levels: the
/// finest value must be below `tol` and the sequence non-increasing up to
/// [`MONOTONE_SLACK`].
pub fn local_equiv(
    a: &OperatorMatrix,
    b: &OperatorMatrix,
    g: &GroupElement,
    window: &WindowSpec,
    t_levels: &[f64],
    rank: usize,
    tol: f64,
    p: f64,
) -> Result<EquivalenceReport> {
    check_levels(t_levels)?;
    let diff = a.sub(b)?;
    let decay = t_levels
        .iter()
        .map(|&t| {
            let block = symbol(&diff, &ScaledElement::new(t, g.clone())?, window, p)?;
            Ok(proxy_of(&block, rank))
        })
        .collect::<Result<Vec<f64>>>()?;
    let monotone = decay
        .windows(2)
        .all(|w| w[1] <= w[0] * (1.0 + MONOTONE_SLACK) + 1e-14);
    let verdict = monotone && decay[decay.len() - 1] < tol;
    Ok(EquivalenceReport {
        point: g.clone(),
        t_levels: t_levels.to_vec(),
        decay,
        verdict,
        tolerance: tol,
        rank,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvarianceScores {
    pub homogeneity: f64,
    pub shift: f64,
}

/// Commutator norms with dilations `π(t,e)` and translations `π(1,g)`,
/// restricted to `interior` on both sides and divided by `‖A‖`.
pub fn invariance_scores(
    a: &OperatorMatrix,
    t_samples: &[f64],
    g_samples: &[GroupElement],
    interior: &RegionMask,
    p: f64,
) -> Result<InvarianceScores> {
    let norm = a.norm();
    if norm == 0.0 {
        return Ok(InvarianceScores { homogeneity: 0.0, shift: 0.0 });
    }
    let params = RepParams::new(&a.grid, p);
    let e = a.grid.group.identity();
    let idx = interior.indices();
    let commutator = |s: &ScaledElement| -> Result<f64> {
        let pi = act_matrix(&params, s)?.to_dense();
        let c = &pi * &a.entries - &a.entries * &pi;
        let block = DMatrix::from_fn(idx.len(), idx.len(), |i, j| c[(idx[i], idx[j])]);
        Ok(largest_singular_value(&block))
    };
    let mut homogeneity: f64 = 0.0;
    for &t in t_samples {
        homogeneity = homogeneity.max(commutator(&ScaledElement::new(t, e.clone())?)?);
    }
    let mut shift: f64 = 0.0;
    for g in g_samples {
        shift = shift.max(commutator(&ScaledElement::shift(g.clone()))?);
    }
    Ok(InvarianceScores {
        homogeneity: homogeneity / norm,
        shift: shift / norm,
    })
}

/// One signed product `± Π_{k∈sets} P_{u_k} [· P^⊥_target]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IeTerm {
    pub sign: f64,
    pub sets: Vec<usize>,
    pub complement: bool,
}

/// `P_F = P_U − P_U P_F^⊥` with `P_U` expanded by inclusion–exclusion over
/// the cover; products with empty support are omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub terms: Vec<IeTerm>,
}

impl Decomposition {
    pub fn term_mask(&self, term: &IeTerm, target: &RegionMask, cover: &[RegionMask]) -> RegionMask {
        let mut m = cover[term.sets[0]].clone();
        for &k in &term.sets[1..] {
            m = m.intersection(&cover[k]);
        }
        if term.complement {
            m = m.intersection(&target.complement());
        }
        m
    }

    /// Sum of the signed diagonal products.
    pub fn assemble(&self, target: &RegionMask, cover: &[RegionMask]) -> OperatorMatrix {
        let n = target.grid.len();
        let mut d = vec![0.0; n];
        for term in &self.terms {
            let m = self.term_mask(term, target, cover);
            for i in m.indices() {
                d[i] += term.sign;
            }
        }
        OperatorMatrix::diagonal(&target.grid, &d)
    }
}

pub fn inclusion_exclusion_decomposition(
    target: &RegionMask,
    cover: &[RegionMask],
) -> Result<Decomposition> {
    for c in cover {
        target.grid.ensure_same(&c.grid)?;
    }
    let union = cover
        .iter()
        .fold(RegionMask::empty(&target.grid), |acc, c| acc.union(c));
    if !target.is_subset_of(&union) {
        return invalid(format!(
            "cover misses {} target points",
            target.intersection(&union.complement()).count()
        ));
    }
    let outside = target.complement();
    let mut terms = Vec::new();
    let mut stack: Vec<(Vec<usize>, RegionMask)> = (0..cover.len())
        .rev()
        .filter(|&k| !cover[k].is_empty())
        .map(|k| (vec![k], cover[k].clone()))
        .collect();
    while let Some((sets, inter)) = stack.pop() {
        let sign = if sets.len() % 2 == 1 { 1.0 } else { -1.0 };
        terms.push(IeTerm { sign, sets: sets.clone(), complement: false });
        if inter.intersects(&outside) {
            terms.push(IeTerm { sign: -sign, sets: sets.clone(), complement: true });
        }
        let last = *sets.last().unwrap();
        for k in (last + 1..cover.len()).rev() {
            let next = inter.intersection(&cover[k]);
            if !next.is_empty() {
                let mut s = sets.clone();
                s.push(k);
                stack.push((s, next));
            }
        }
    }
    Ok(Decomposition { terms })
}

/// One summand `coefficient · B · S_A(scale, center) · C`.
#[derive(Debug, Clone)]
pub struct ReductionTerm {
    pub coefficient: f64,
    pub center: GroupElement,
    pub left: DMatrix<f64>,
    pub right: DMatrix<f64>,
}

/// Mixed-scale presymbol written through same-scale symbols.
#[derive(Debug, Clone)]
pub struct PresymbolReduction {
    pub scale: f64,
    pub cover: Vec<GroupElement>,
    pub terms: Vec<ReductionTerm>,
    /// Pairs of products with disjoint supports; they vanish for operators
    /// whose off-diagonal blocks vanish (e.g. multiplication operators).
    pub dropped_pairs: usize,
}

impl PresymbolReduction {
    /// Evaluates the finite sum with the supplied symbol oracle.
    pub fn assemble(
        &self,
        mut symbol_at: impl FnMut(&ScaledElement) -> Result<DMatrix<f64>>,
    ) -> Result<DMatrix<f64>> {
        let mut cache: HashMap<Vec<u64>, DMatrix<f64>> = HashMap::new();
        let mut out: Option<DMatrix<f64>> = None;
        for term in &self.terms {
            let key: Vec<u64> = term.center.0.iter().map(|v| v.to_bits()).collect();
            if !cache.contains_key(&key) {
                let s = ScaledElement::new(self.scale, term.center.clone())?;
                cache.insert(key.clone(), symbol_at(&s)?);
            }
            let sym = &cache[&key];
            let piece = &term.left * sym * &term.right * term.coefficient;
            out = Some(match out {
                None => piece,
                Some(acc) => acc + piece,
            });
        }
        Ok(out.unwrap_or_else(|| DMatrix::zeros(self.terms.len(), self.terms.len())))
    }
}

/// Builds the reduction of `Ŝ_A(left; right)` to symbols at `scale` (which
/// must not exceed either scale). The union `F_left ∪ F_right` is covered by
/// windows at `scale / r_cover`; inclusion–exclusion splits both projections,
/// and each pair of intersecting pieces is absorbed in one window at `scale`
/// found by exhaustive search over lattice points of the union.
pub fn reduce_presymbol(
    grid: &GridSpec,
    window: &WindowSpec,
    left: &ScaledElement,
    right: &ScaledElement,
    scale: f64,
    r_cover: f64,
    p: f64,
) -> Result<PresymbolReduction> {
    window.mask.grid.ensure_same(grid)?;
    if scale > left.t.min(right.t) {
        return invalid("symbol scale must not exceed the presymbol scales");
    }
    let fine = scale / r_cover;
    if !is_dyadic(scale) || !is_dyadic(fine) {
        return invalid("scale and scale / r_cover must be dyadic");
    }
    let group = grid.group;
    let params = RepParams::new(grid, p);
    let fl = transform_mask(left, &window.mask)?.mask;
    let fr = transform_mask(right, &window.mask)?.mask;
    let union = fl.union(&fr);
    let union_pts = union.indices();

    let window_at = |t: f64, i: usize| -> Result<RegionMask> {
        Ok(transform_mask(&ScaledElement::new(t, grid.element(i))?, &window.mask)?.mask)
    };

    // greedy cover of the union by fine windows centred in the union
    let fine_windows: Vec<(usize, RegionMask)> = union_pts
        .iter()
        .map(|&i| Ok((i, window_at(fine, i)?)))
        .collect::<Result<_>>()?;
    let mut uncovered = union.clone();
    let mut cover_centers = Vec::new();
    let mut cover = Vec::new();
    while !uncovered.is_empty() {
        let first = uncovered.indices()[0];
        let best = fine_windows
            .iter()
            .filter(|(_, m)| m.member[first])
            .max_by_key(|(_, m)| m.intersection(&uncovered).count())
            .ok_or_else(|| crate::Error::InvalidArgument("union cannot be covered".into()))?;
        uncovered = uncovered.intersection(&best.1.complement());
        cover_centers.push(grid.element(best.0));
        cover.push(best.1.clone());
    }

    let dl = inclusion_exclusion_decomposition(&fl, &cover)?;
    let dr = inclusion_exclusion_decomposition(&fr, &cover)?;
    let pieces = |d: &Decomposition, target: &RegionMask| -> Vec<(f64, RegionMask)> {
        d.terms
            .iter()
            .map(|t| (t.sign, d.term_mask(t, target, &cover)))
            .filter(|(_, m)| !m.is_empty())
            .collect()
    };
    let left_pieces = pieces(&dl, &fl);
    let right_pieces = pieces(&dr, &fr);

    let coarse_windows: Vec<(usize, RegionMask)> = union_pts
        .iter()
        .map(|&i| Ok((i, window_at(scale, i)?)))
        .collect::<Result<_>>()?;

    let l_inv = act_matrix(&params, &group.scaled_inverse(left)?)?;
    let r_act = act_matrix(&params, right)?;
    let r_cols = r_act.columns();
    let win = window.indices();
    let mut act_cache: HashMap<usize, (ActionMatrix, Vec<Vec<(usize, f64)>>, ActionMatrix)> =
        HashMap::new();

    let mut terms = Vec::new();
    let mut dropped = 0;
    for (sl, ml) in &left_pieces {
        for (sr, mr) in &right_pieces {
            if !ml.intersects(mr) {
                dropped += 1;
                continue;
            }
            let both = ml.union(mr);
            let (center, _) = coarse_windows
                .iter()
                .find(|(_, w)| both.is_subset_of(w))
                .ok_or_else(|| {
                    crate::Error::InvalidArgument(
                        "no covering window at the symbol scale; window is not r-self-covering".into(),
                    )
                })?;
            if !act_cache.contains_key(center) {
                let w = ScaledElement::new(scale, grid.element(*center))?;
                let pw = act_matrix(&params, &w)?;
                let pw_cols = pw.columns();
                let pw_inv = act_matrix(&params, &group.scaled_inverse(&w)?)?;
                act_cache.insert(*center, (pw, pw_cols, pw_inv));
            }
            let (pw, pw_cols, pw_inv) = &act_cache[center];
            let dl_diag = diag_of(ml);
            let dr_diag = diag_of(mr);
            // B = P_e π(l⁻¹) D_l π(w) P_e,  C = P_e π(w⁻¹) D_r π(r) P_e
            let b = sandwich_diag_block(&l_inv, &dl_diag, pw_cols, &win, l_inv.joint_factor(pw));
            let c = sandwich_diag_block(pw_inv, &dr_diag, &r_cols, &win, pw_inv.joint_factor(&r_act));
            terms.push(ReductionTerm {
                coefficient: sl * sr,
                center: grid.element(*center),
                left: b,
                right: c,
            });
        }
    }
    Ok(PresymbolReduction {
        scale,
        cover: cover_centers,
        terms,
        dropped_pairs: dropped,
    })
}

fn diag_of(m: &RegionMask) -> Vec<f64> {
    m.member.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect()
}

fn sandwich_diag_block(
    l: &ActionMatrix,
    d: &[f64],
    r_cols: &[Vec<(usize, f64)>],
    win: &[usize],
    factor: f64,
) -> DMatrix<f64> {
    DMatrix::from_fn(win.len(), win.len(), |i, j| {
        let mut acc = 0.0;
        for &(k, c) in l.row(win[i]) {
            if d[k] == 0.0 {
                continue;
            }
            for &(q, e) in &r_cols[win[j]] {
                if q == k {
                    acc += c * d[k] * e;
                }
            }
        }
        factor * acc
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function_space::{make_grid, SampledFunction};
    use crate::group::GroupDescriptor;
    use crate::operator::{multiplication_operator, shift_operator, WindowSpec};

    fn se(t: f64, v: &[f64]) -> ScaledElement {
        ScaledElement::new(t, GroupElement(v.to_vec())).unwrap()
    }

    fn setup() -> (GridSpec, WindowSpec) {
        let g = make_grid(GroupDescriptor::euclidean(1), 0.0625, 8.0).unwrap();
        let w = WindowSpec::homogeneous_box(&g, 1.0).unwrap();
        (g, w)
    }

    fn resolved(w: &WindowSpec, t: f64) -> Vec<bool> {
        w.indices()
            .iter()
            .map(|&i| {
                let j = w.mask.grid.multi_index(i)[0];
                j % (1.0 / t).round() as i64 == 0
            })
            .collect()
    }

    #[test]
    fn identity_symbol_is_identity_on_resolved_points() {
        let (g, w) = setup();
        let id = OperatorMatrix::identity(&g);
        for t in [1.0, 0.5, 0.25] {
            let s = symbol(&id, &se(t, &[1.0]), &w, 2.0).unwrap();
            let res = resolved(&w, t);
            for i in 0..w.size() {
                for j in 0..w.size() {
                    let expected = if i == j && res[i] { 1.0 } else { 0.0 };
                    assert!((s[(i, j)] - expected).abs() < 1e-15);
                }
            }
        }
        let s = symbol(&id, &se(1.0, &[0.0]), &w, 2.0).unwrap();
        assert_eq!(s, DMatrix::identity(w.size(), w.size()));
    }

    #[test]
    fn multiplication_presymbol_under_shift() {
        let (g, w) = setup();
        let a = SampledFunction::from_fn(&g, 2.0, |x| x[0].cos());
        let m = multiplication_operator(&a);
        let b = se(1.0, &[1.5]);
        let block = presymbol(&m, &b, &b, &w, 2.0).unwrap();
        // oracle: conjugation by the dense shift matrix
        let params = RepParams::new(&g, 2.0);
        let sh = act_matrix(&params, &b).unwrap().to_dense();
        let shinv = act_matrix(&params, &se(1.0, &[-1.5])).unwrap().to_dense();
        let full = shinv * &m.entries * sh;
        let win = w.indices();
        for (i, &wi) in win.iter().enumerate() {
            for (j, &wj) in win.iter().enumerate() {
                assert!((block[(i, j)] - full[(wi, wj)]).abs() < 1e-15);
            }
            let xi = g.point(wi)[0];
            assert!((block[(i, i)] - (1.5 + xi).cos()).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_operator_has_zero_presymbol() {
        let (g, w) = setup();
        let z = OperatorMatrix::zeros(&g);
        let block = presymbol(&z, &se(0.5, &[1.0]), &se(0.25, &[-2.0]), &w, 2.0).unwrap();
        assert_eq!(block.amax(), 0.0);
    }

    #[test]
    fn symbol_of_multiplication_by_sine() {
        let (g, w) = setup();
        let a = SampledFunction::from_fn(&g, 2.0, |x| x[0].sin());
        let m = multiplication_operator(&a);
        let s = symbol(&m, &se(0.25, &[0.0]), &w, 2.0).unwrap();
        let res = resolved(&w, 0.25);
        for (i, &wi) in w.indices().iter().enumerate() {
            let xi = g.point(wi)[0];
            let expected = if res[i] { (xi / 4.0).sin() } else { 0.0 };
            assert!((s[(i, i)] - expected).abs() < 1e-15);
        }
        let norm = largest_singular_value(&s);
        assert!((norm - 0.25f64.sin()).abs() < 1e-12);
        assert!((norm - 0.247404).abs() < 1e-6);
    }

    #[test]
    fn far_shift_has_zero_symbol() {
        let (g, w) = setup();
        let s4 = shift_operator(&g, &GroupElement(vec![4.0])).unwrap();
        let block = symbol(&s4, &se(1.0, &[0.0]), &w, 2.0).unwrap();
        assert_eq!(block.amax(), 0.0);
    }

    #[test]
    fn alt_presymbol_examples() {
        let (g, w) = setup();
        let a = SampledFunction::from_fn(&g, 2.0, |x| x[0].sin());
        let m = multiplication_operator(&a);
        let id = se(1.0, &[0.0]);
        let pe = projection_matrix(&w.mask);
        let alt = alt_presymbol(&m, &id, &id, &w).unwrap();
        assert_eq!(alt, pe.compose(&m).unwrap().compose(&pe).unwrap());
        let l = se(0.5, &[1.0]);
        let r = se(0.25, &[1.25]);
        let ident = alt_presymbol(&OperatorMatrix::identity(&g), &l, &r, &w).unwrap();
        let fl = transform_mask(&l, &w.mask).unwrap().mask;
        let fr = transform_mask(&r, &w.mask).unwrap().mask;
        assert_eq!(ident, projection_matrix(&fl.intersection(&fr)));
    }

    #[test]
    fn presymbol_from_alternative_presymbol() {
        let (g, w) = setup();
        let a = SampledFunction::from_fn(&g, 2.0, |x| x[0].sin());
        let ops = [
            multiplication_operator(&a),
            crate::operator::hilbert_transform(&g).unwrap(),
        ];
        for op in &ops {
            for (l, r) in [
                (se(0.5, &[1.0]), se(0.25, &[1.5])),
                (se(1.0, &[-2.0]), se(0.125, &[0.0])),
            ] {
                let direct = presymbol(op, &l, &r, &w, 2.0).unwrap();
                let alt = alt_presymbol(op, &l, &r, &w).unwrap();
                let via = window_double_act(&alt, &l, &r, &w, 2.0).unwrap();
                assert!((direct - via).amax() < 1e-12);
            }
        }
    }

    #[test]
    fn local_equiv_examples() {
        let (g, w) = setup();
        let levels = [0.5, 0.25, 0.125, 0.0625];
        let a = multiplication_operator(&SampledFunction::from_fn(&g, 2.0, |x| x[0].sin()));
        let e = GroupElement(vec![0.0]);
        let same = local_equiv(&a, &a, &e, &w, &levels, 0, 1e-3, 2.0).unwrap();
        assert!(same.verdict && same.decay.iter().all(|&d| d == 0.0));
        let zero = OperatorMatrix::zeros(&g);
        let rep = local_equiv(&a, &zero, &e, &w, &levels, 0, 0.1, 2.0).unwrap();
        for (d, t) in rep.decay.iter().zip(levels) {
            assert!((d - t.sin()).abs() < 1e-12);
        }
        assert!(rep.verdict);
        let id = OperatorMatrix::identity(&g);
        let rep = local_equiv(&a, &id, &e, &w, &levels, 0, 0.1, 2.0).unwrap();
        for (d, t) in rep.decay.iter().zip(levels) {
            assert!((d - (1.0 + t.sin())).abs() < 1e-12);
        }
        assert!(!rep.verdict);
        assert!(local_equiv(&a, &id, &e, &w, &[0.3], 0, 0.1, 2.0).is_err());
    }

    #[test]
    fn invariance_examples() {
        let (g, _) = setup();
        let interior = RegionMask::closed_box(&g, &[-2.0], &[2.0]);
        let ts = [0.5, 0.25];
        let gs = [GroupElement(vec![0.5]), GroupElement(vec![-1.0])];
        let id = OperatorMatrix::identity(&g);
        let sc = invariance_scores(&id, &ts, &gs, &interior, 2.0).unwrap();
        assert_eq!((sc.homogeneity, sc.shift), (0.0, 0.0));
        let sh = shift_operator(&g, &GroupElement(vec![1.0])).unwrap();
        let sc = invariance_scores(&sh, &ts, &gs, &interior, 2.0).unwrap();
        assert_eq!(sc.shift, 0.0);
        assert!(sc.homogeneity > 0.5);
        let z = OperatorMatrix::zeros(&g);
        let sc = invariance_scores(&z, &ts, &gs, &interior, 2.0).unwrap();
        assert_eq!((sc.homogeneity, sc.shift), (0.0, 0.0));
    }

    #[test]
    fn hilbert_dilation_commutator_does_not_shrink_with_h() {
        // π(1/2) samples every other point, so the commutator with the
        // discrete Hilbert transform stays of order one on any grid
        let mut scores = Vec::new();
        for h in [0.125, 0.0625] {
            let g = make_grid(GroupDescriptor::euclidean(1), h, 8.0).unwrap();
            let interior = RegionMask::closed_box(&g, &[-2.0], &[2.0]);
            let hil = crate::operator::hilbert_transform(&g).unwrap();
            let sc = invariance_scores(&hil, &[0.5], &[GroupElement(vec![0.5])], &interior, 2.0).unwrap();
            assert!(sc.shift < 1e-12);
            scores.push(sc.homogeneity);
        }
        assert!(scores[1] > 0.9 * scores[0]);
    }

    #[test]
    fn inclusion_exclusion_examples() {
        let g = make_grid(GroupDescriptor::euclidean(1), 0.05, 4.0).unwrap();
        let f = RegionMask::closed_box(&g, &[0.0], &[2.0]);
        let u1 = RegionMask::closed_box(&g, &[-0.2], &[1.2]);
        let u2 = RegionMask::closed_box(&g, &[0.8], &[2.2]);
        let d = inclusion_exclusion_decomposition(&f, &[u1.clone(), u2.clone()]).unwrap();
        assert_eq!(d.assemble(&f, &[u1.clone(), u2.clone()]), projection_matrix(&f));
        assert!(d.terms.iter().all(|t| !t.sets.is_empty()));
        // single covering set: P_F = P_u − P_u P_F^⊥
        let big = RegionMask::closed_box(&g, &[-1.0], &[3.0]);
        let d1 = inclusion_exclusion_decomposition(&f, std::slice::from_ref(&big)).unwrap();
        assert_eq!(d1.terms.len(), 2);
        assert_eq!(d1.assemble(&f, &[big]), projection_matrix(&f));
        // two sets covering their own union
        let un = u1.union(&u2);
        let d2 = inclusion_exclusion_decomposition(&un, &[u1.clone(), u2.clone()]).unwrap();
        assert_eq!(d2.terms.len(), 3);
        let short = RegionMask::closed_box(&g, &[0.0], &[1.0]);
        assert!(inclusion_exclusion_decomposition(&f, &[short]).is_err());
    }

    #[test]
    fn reduction_reproduces_mixed_scale_presymbol() {
        let (g, w) = setup();
        let m = multiplication_operator(&SampledFunction::from_fn(&g, 2.0, |x| x[0].sin()));
        let l = se(0.5, &[1.0]);
        let r = se(0.25, &[1.5]);
        let red = reduce_presymbol(&g, &w, &l, &r, 0.125, 2.0, 2.0).unwrap();
        let rebuilt = red.assemble(|s| symbol(&m, s, &w, 2.0)).unwrap();
        let direct = presymbol(&m, &l, &r, &w, 2.0).unwrap();
        assert!((rebuilt - direct).amax() < 1e-10);
        assert!(reduce_presymbol(&g, &w, &l, &r, 0.5, 2.0, 2.0).is_err());
    }
}
