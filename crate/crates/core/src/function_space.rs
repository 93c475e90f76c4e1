//! Discretized `L^p(G)`: uniform grids in exponential coordinates, sampled
//! functions with implicit zero extension, region masks and the invariant
//! pairings on `G ⋊ ℝ₊`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::group::{GroupDescriptor, GroupElement};

/// Default cap on the total number of grid points.
pub const DEFAULT_POINT_CAP: usize = 1 << 20;

const LATTICE_EPS: f64 = 1e-9;

/// A uniform grid `{(j₁h₁, …, j_m h_m)}` covering `[−R_c, R_c)` per coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub group: GroupDescriptor,
    spacing: Vec<f64>,
    extent: Vec<f64>,
    min_index: Vec<i64>,
    counts: Vec<usize>,
    strides: Vec<usize>,
}

/// Where a continuous point lands relative to the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Locate {
    Inside(usize),
    Outside,
    OffLattice,
}

/// Uniform grid with spacing `h` and half-width `R` in every coordinate.
pub fn make_grid(group: GroupDescriptor, h: f64, r: f64) -> Result<GridSpec> {
    let m = group.dim();
    GridSpec::new(group, vec![h; m], vec![r; m], DEFAULT_POINT_CAP)
}

impl GridSpec {
    pub fn new(
        group: GroupDescriptor,
        spacing: Vec<f64>,
        extent: Vec<f64>,
        cap: usize,
    ) -> Result<Self> {
        group.validate()?;
        let m = group.dim();
        if spacing.len() != m || extent.len() != m {
            return invalid(format!("grid needs {m} spacings and extents"));
        }
        let mut counts = Vec::with_capacity(m);
        let mut min_index = Vec::with_capacity(m);
        for (&h, &r) in spacing.iter().zip(&extent) {
            if !(h > 0.0 && h.is_finite() && r > 0.0 && r.is_finite()) {
                return invalid("grid spacing and extent must be positive");
            }
            let q = 2.0 * r / h;
            let qi = q.round();
            if (q - qi).abs() > LATTICE_EPS * q.max(1.0) || qi < 1.0 {
                return invalid(format!("2R/h = {q} is not a positive integer"));
            }
            counts.push(qi as usize);
            min_index.push((-r / h - LATTICE_EPS).ceil() as i64);
        }
        let total = counts
            .iter()
            .try_fold(1usize, |acc, &c| acc.checked_mul(c))
            .unwrap_or(usize::MAX);
        if total > cap {
            return Err(Error::ResourceLimit(format!(
                "grid has {total} points, cap is {cap}"
            )));
        }
        let mut strides = vec![1usize; m];
        for c in (0..m.saturating_sub(1)).rev() {
            strides[c] = strides[c + 1] * counts[c + 1];
        }
        Ok(GridSpec {
            group,
            spacing,
            extent,
            min_index,
            counts,
            strides,
        })
    }

    /// Grid adapted to the dilation structure: degree-1 coordinates have
    /// spacing `h`, the Heisenberg centre has spacing `h²/2`, so the lattice
    /// is closed under the group law and under `τ_{2^j}` for `j ≥ 0`.
    pub fn homogeneous(group: GroupDescriptor, h: f64, points_per_axis: usize) -> Result<Self> {
        let spacing: Vec<f64> = group
            .coordinate_degrees()
            .iter()
            .map(|&d| if d == 1 { h } else { h * h / 2.0 })
            .collect();
        let extent = spacing
            .iter()
            .map(|s| s * points_per_axis as f64 / 2.0)
            .collect();
        GridSpec::new(group, spacing, extent, DEFAULT_POINT_CAP)
    }

    pub fn dim(&self) -> usize {
        self.spacing.len()
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn extent(&self) -> &[f64] {
        &self.extent
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Haar weight of one cell, `Π h_c`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    pub fn multi_index(&self, idx: usize) -> Vec<i64> {
        (0..self.dim())
            .map(|c| ((idx / self.strides[c]) % self.counts[c]) as i64 + self.min_index[c])
            .collect()
    }

    pub fn index_of(&self, multi: &[i64]) -> Option<usize> {
        let mut idx = 0;
        for c in 0..self.dim() {
            let off = multi[c] - self.min_index[c];
            if off < 0 || off as usize >= self.counts[c] {
                return None;
            }
            idx += off as usize * self.strides[c];
        }
        Some(idx)
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        self.multi_index(idx)
            .iter()
            .zip(&self.spacing)
            .map(|(&j, h)| j as f64 * h)
            .collect()
    }

    pub fn element(&self, idx: usize) -> GroupElement {
        GroupElement(self.point(idx))
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(|i| self.point(i))
    }

    /// Lattice coordinates of `x`, if every coordinate is an integer multiple
    /// of the spacing (ignores the extent).
    pub fn lattice_coords(&self, x: &[f64]) -> Option<Vec<i64>> {
        x.iter()
            .zip(&self.spacing)
            .map(|(v, h)| {
                let q = v / h;
                let j = q.round();
                ((q - j).abs() <= LATTICE_EPS * q.abs().max(1.0)).then_some(j as i64)
            })
            .collect()
    }

    pub fn on_lattice(&self, x: &[f64]) -> bool {
        self.lattice_coords(x).is_some()
    }

    pub fn locate(&self, x: &[f64]) -> Locate {
        match self.lattice_coords(x) {
            None => Locate::OffLattice,
            Some(j) => match self.index_of(&j) {
                Some(i) => Locate::Inside(i),
                None => Locate::Outside,
            },
        }
    }

    /// Index of the nearest grid point if it lies within the extent.
    pub fn nearest(&self, x: &[f64]) -> Option<usize> {
        let j: Vec<i64> = x
            .iter()
            .zip(&self.spacing)
            .map(|(v, h)| (v / h).round() as i64)
            .collect();
        self.index_of(&j)
    }

    pub(crate) fn ensure_same(&self, other: &GridSpec) -> Result<()> {
        if self != other {
            return invalid("grid mismatch");
        }
        Ok(())
    }
}

/// A function on the grid, zero outside the extent.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    pub grid: GridSpec,
    pub values: Vec<f64>,
    pub p: f64,
}

impl SampledFunction {
    pub fn new(grid: GridSpec, values: Vec<f64>, p: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return invalid(format!(
                "function has {} values, grid has {} points",
                values.len(),
                grid.len()
            ));
        }
        check_exponent(p)?;
        Ok(SampledFunction { grid, values, p })
    }

    pub fn from_fn(grid: &GridSpec, p: f64, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = grid.points().map(|x| f(&x)).collect();
        SampledFunction {
            grid: grid.clone(),
            values,
            p,
        }
    }

    pub fn zeros(grid: &GridSpec, p: f64) -> Self {
        SampledFunction {
            grid: grid.clone(),
            values: vec![0.0; grid.len()],
            p,
        }
    }

    /// `(Σ |f|^p h^m)^{1/p}`.
    pub fn lp_norm(&self) -> f64 {
        let vol = self.grid.cell_volume();
        let s: f64 = self.values.iter().map(|v| v.abs().powf(self.p)).sum();
        (s * vol).powf(1.0 / self.p)
    }

    pub fn max_abs_diff(&self, other: &SampledFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return invalid(format!("exponent p must lie in [1, ∞), got {p}"));
    }
    Ok(())
}

/// A finite set of grid points standing for a closed subset of `G`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionMask {
    pub grid: GridSpec,
    pub member: Vec<bool>,
}

impl Eq for GridSpec {}

impl RegionMask {
    pub fn new(grid: GridSpec, member: Vec<bool>) -> Result<Self> {
        if member.len() != grid.len() {
            return invalid("mask length does not match grid");
        }
        Ok(RegionMask { grid, member })
    }

    pub fn from_predicate(grid: &GridSpec, pred: impl Fn(&[f64]) -> bool) -> Self {
        RegionMask {
            grid: grid.clone(),
            member: grid.points().map(|x| pred(&x)).collect(),
        }
    }

    pub fn full(grid: &GridSpec) -> Self {
        RegionMask {
            grid: grid.clone(),
            member: vec![true; grid.len()],
        }
    }

    pub fn empty(grid: &GridSpec) -> Self {
        RegionMask {
            grid: grid.clone(),
            member: vec![false; grid.len()],
        }
    }

    /// Closed axis-aligned box `lo ≤ x ≤ hi` (coordinatewise).
    pub fn closed_box(grid: &GridSpec, lo: &[f64], hi: &[f64]) -> Self {
        let tol: Vec<f64> = grid.spacing().iter().map(|h| h * 1e-9).collect();
        Self::from_predicate(grid, |x| {
            x.iter()
                .enumerate()
                .all(|(c, v)| *v >= lo[c] - tol[c] && *v <= hi[c] + tol[c])
        })
    }

    pub fn count(&self) -> usize {
        self.member.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.member.iter().any(|&b| b)
    }

    pub fn indices(&self) -> Vec<usize> {
        (0..self.member.len()).filter(|&i| self.member[i]).collect()
    }

    pub fn contains_index(&self, i: usize) -> bool {
        self.member[i]
    }

    pub fn intersection(&self, other: &RegionMask) -> RegionMask {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn union(&self, other: &RegionMask) -> RegionMask {
        self.zip_with(other, |a, b| a || b)
    }

    pub fn complement(&self) -> RegionMask {
        RegionMask {
            grid: self.grid.clone(),
            member: self.member.iter().map(|b| !b).collect(),
        }
    }

    pub fn is_subset_of(&self, other: &RegionMask) -> bool {
        self.member.iter().zip(&other.member).all(|(&a, &b)| !a || b)
    }

    pub fn intersects(&self, other: &RegionMask) -> bool {
        self.member.iter().zip(&other.member).any(|(&a, &b)| a && b)
    }

    fn zip_with(&self, other: &RegionMask, f: impl Fn(bool, bool) -> bool) -> RegionMask {
        RegionMask {
            grid: self.grid.clone(),
            member: self
                .member
                .iter()
                .zip(&other.member)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn indicator(&self, p: f64) -> SampledFunction {
        SampledFunction {
            grid: self.grid.clone(),
            values: self.member.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
            p,
        }
    }
}

/// `P_F f`.
pub fn project_region(mask: &RegionMask, f: &SampledFunction) -> Result<SampledFunction> {
    mask.grid.ensure_same(&f.grid)?;
    Ok(SampledFunction {
        grid: f.grid.clone(),
        values: f
            .values
            .iter()
            .zip(&mask.member)
            .map(|(&v, &m)| if m { v } else { 0.0 })
            .collect(),
        p: f.p,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairingKind {
    Haar,
    Hardy,
}

fn level_integral(f1: &SampledFunction, f2: &SampledFunction) -> Result<f64> {
    f1.grid.ensure_same(&f2.grid)?;
    let vol = f1.grid.cell_volume();
    Ok(f1.values.iter().zip(&f2.values).map(|(a, b)| a * b).sum::<f64>() * vol)
}

fn check_levels(f1: &[SampledFunction], f2: &[SampledFunction], t_levels: &[f64]) -> Result<()> {
    if t_levels.is_empty() {
        return invalid("pairing needs at least one t-level");
    }
    if f1.len() != t_levels.len() || f2.len() != t_levels.len() {
        return invalid("one function per t-level is required in each family");
    }
    if t_levels.iter().any(|&t| !(t > 0.0)) || t_levels.windows(2).any(|w| w[1] >= w[0]) {
        return invalid("t-levels must be positive and strictly decreasing");
    }
    Ok(())
}

/// Invariant pairing of two scale-indexed families on `G ⋊ ℝ₊`.
///
/// `Haar` integrates `f₁ f̄₂ dμ(g) dt / t^{k+1}` with trapezoid weights in `t`
/// (for the ax+b group this is `da db / a²`). `Hardy` is `∫_G f₁ f̄₂ dμ` at the
/// smallest level.
pub fn pairing(
    kind: PairingKind,
    f1: &[SampledFunction],
    f2: &[SampledFunction],
    t_levels: &[f64],
) -> Result<f64> {
    check_levels(f1, f2, t_levels)?;
    match kind {
        PairingKind::Hardy => level_integral(&f1[f1.len() - 1], &f2[f2.len() - 1]),
        PairingKind::Haar => {
            if t_levels.len() < 2 {
                return invalid("Haar pairing needs at least two t-levels");
            }
            let k = f1[0].grid.group.homogeneous_dimension() as i32;
            let weights = trapezoid_weights(t_levels);
            let mut total = 0.0;
            for (i, &t) in t_levels.iter().enumerate() {
                total += level_integral(&f1[i], &f2[i])? * weights[i] / t.powi(k + 1);
            }
            Ok(total)
        }
    }
}

/// Hardy pairing with linear extrapolation to `t = 0` from the last two levels.
pub fn hardy_pairing_extrapolated(
    f1: &[SampledFunction],
    f2: &[SampledFunction],
    t_levels: &[f64],
) -> Result<f64> {
    check_levels(f1, f2, t_levels)?;
    let n = t_levels.len();
    if n < 2 {
        return invalid("extrapolation needs at least two t-levels");
    }
    let v1 = level_integral(&f1[n - 1], &f2[n - 1])?;
    let v0 = level_integral(&f1[n - 2], &f2[n - 2])?;
    Ok(richardson(v0, t_levels[n - 2], v1, t_levels[n - 1]))
}

/// Linear extrapolation of `(t_coarse, v_coarse), (t_fine, v_fine)` to zero.
pub(crate) fn richardson(v_coarse: f64, t_coarse: f64, v_fine: f64, t_fine: f64) -> f64 {
    v_fine + (v_fine - v_coarse) * t_fine / (t_coarse - t_fine)
}

/// Trapezoid weights for a strictly decreasing list of nodes.
pub(crate) fn trapezoid_weights(t: &[f64]) -> Vec<f64> {
    let n = t.len();
    (0..n)
        .map(|i| {
            let upper = if i == 0 { t[0] } else { t[i - 1] };
            let lower = if i + 1 == n { t[n - 1] } else { t[i + 1] };
            (upper - lower) / 2.0
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e1() -> GroupDescriptor {
        GroupDescriptor::euclidean(1)
    }

    #[test]
    fn make_grid_examples() {
        assert_eq!(make_grid(e1(), 0.0625, 8.0).unwrap().len(), 256);
        let g = make_grid(e1(), 0.5, 1.0).unwrap();
        let pts: Vec<f64> = g.points().map(|x| x[0]).collect();
        assert_eq!(pts, vec![-1.0, -0.5, 0.0, 0.5]);
        let h = make_grid(GroupDescriptor::heisenberg(1), 0.5, 2.0).unwrap();
        assert_eq!(h.len(), 512);
    }

    #[test]
    fn make_grid_errors() {
        assert!(matches!(
            make_grid(e1(), 0.3, 1.0),
            Err(Error::InvalidArgument(_))
        ));
        let r = GridSpec::new(GroupDescriptor::euclidean(3), vec![0.01; 3], vec![8.0; 3], 1 << 20);
        assert!(matches!(r, Err(Error::ResourceLimit(_))));
    }

    #[test]
    fn odd_point_count_stays_on_lattice() {
        let g = make_grid(e1(), 0.5, 0.75).unwrap();
        let pts: Vec<f64> = g.points().map(|x| x[0]).collect();
        assert_eq!(pts, vec![-0.5, 0.0, 0.5]);
    }

    #[test]
    fn homogeneous_heisenberg_grid() {
        let g = GridSpec::homogeneous(GroupDescriptor::heisenberg(1), 0.5, 24).unwrap();
        assert_eq!(g.len(), 24 * 24 * 24);
        assert_eq!(g.spacing(), &[0.125, 0.5, 0.5]);
        assert_eq!(g.extent(), &[1.5, 6.0, 6.0]);
    }

    #[test]
    fn locate_and_index_round_trip() {
        let g = make_grid(GroupDescriptor::heisenberg(1), 0.5, 2.0).unwrap();
        for i in [0, 17, 300, 511] {
            assert_eq!(g.locate(&g.point(i)), Locate::Inside(i));
        }
        assert_eq!(g.locate(&[0.25, 0.0, 0.0]), Locate::OffLattice);
        assert_eq!(g.locate(&[2.0, 0.0, 0.0]), Locate::Outside);
    }

    #[test]
    fn lp_norm_examples() {
        let g = make_grid(e1(), 0.25, 2.0).unwrap();
        let ind = SampledFunction::from_fn(&g, 2.0, |x| if (0.0..1.0).contains(&x[0]) { 1.0 } else { 0.0 });
        assert!((ind.lp_norm() - 1.0).abs() < 1e-15);
        assert_eq!(SampledFunction::zeros(&g, 2.0).lp_norm(), 0.0);
        let c = SampledFunction::from_fn(&g, 1.0, |_| -3.0);
        assert!((c.lp_norm() - 3.0 * 4.0).abs() < 1e-12);
        assert!(SampledFunction::new(g.clone(), vec![0.0; 3], 2.0).is_err());
        assert!(SampledFunction::new(g.clone(), vec![0.0; g.len()], 0.5).is_err());
    }

    #[test]
    fn project_region_examples() {
        let g = make_grid(e1(), 0.25, 2.0).unwrap();
        let one = SampledFunction::from_fn(&g, 2.0, |_| 1.0);
        let f = RegionMask::closed_box(&g, &[0.0], &[1.0]);
        let pf = project_region(&f, &one).unwrap();
        assert_eq!(pf.values, f.indicator(2.0).values);
        assert_eq!(project_region(&RegionMask::full(&g), &one).unwrap(), one);
        assert_eq!(
            project_region(&RegionMask::empty(&g), &one).unwrap().lp_norm(),
            0.0
        );
        let other = make_grid(e1(), 0.5, 2.0).unwrap();
        assert!(project_region(&RegionMask::full(&other), &one).is_err());
    }

    #[test]
    fn hardy_pairing_examples() {
        let g = make_grid(e1(), 0.0625, 4.0).unwrap();
        let levels = [0.5, 0.25, 0.125];
        let ind = RegionMask::from_predicate(&g, |x| (0.0..1.0).contains(&x[0])).indicator(2.0);
        let fam = vec![ind.clone(); 3];
        let v = pairing(PairingKind::Hardy, &fam, &fam, &levels).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        let v = hardy_pairing_extrapolated(&fam, &fam, &levels).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        let other = RegionMask::from_predicate(&g, |x| x[0] >= 2.0).indicator(2.0);
        let fam2 = vec![other; 3];
        assert_eq!(pairing(PairingKind::Hardy, &fam, &fam2, &levels).unwrap(), 0.0);
        assert!(pairing(PairingKind::Hardy, &[], &[], &[]).is_err());
        assert!(pairing(PairingKind::Hardy, &fam, &fam, &[0.1, 0.2, 0.3]).is_err());
    }

    #[test]
    fn haar_pairing_on_ax_plus_b_matches_closed_form() {
        // ∫₁² ∫₀¹ da db / a² = 1/2
        let g = make_grid(e1(), 0.0625, 4.0).unwrap();
        let levels: Vec<f64> = (0..=200).map(|i| 2.0 - i as f64 * 0.005).collect();
        let b_ind = RegionMask::closed_box(&g, &[0.0], &[1.0 - 0.0625]).indicator(2.0);
        let fam: Vec<SampledFunction> = levels.iter().map(|_| b_ind.clone()).collect();
        let v = pairing(PairingKind::Haar, &fam, &fam, &levels).unwrap();
        assert!((v - 0.5).abs() < 0.01 * 0.5, "haar pairing {v}");
    }

    #[test]
    fn richardson_removes_linear_term() {
        let v = |t: f64| 3.0 + 2.0 * t;
        assert!((richardson(v(0.5), 0.5, v(0.25), 0.25) - 3.0).abs() < 1e-15);
    }
}
