//! Reconstruction of operators from local data: envelope sums over
//! partitions and the inverse covariant transform
//! `M: A(t,g) ↦ lim_{t→0} ∫_G P_(t,g) A(t,g) P_(t,g) dμ(g)`.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::function_space::{richardson, trapezoid_weights, GridSpec, Locate, PairingKind, RegionMask};
use crate::group::{GroupElement, ScaledElement};
use crate::localization::{check_levels, SymbolField};
use crate::operator::{largest_singular_value, proxy_of, transform_mask, OperatorMatrix, WindowSpec};

/// Disjoint cells `u_j` with anchors `x_j ∈ u_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub cells: Vec<RegionMask>,
    pub anchors: Vec<GroupElement>,
}

impl Partition {
    pub fn new(cells: Vec<RegionMask>, anchors: Vec<GroupElement>) -> Result<Self> {
        if cells.is_empty() || cells.len() != anchors.len() {
            return invalid("a partition needs one anchor per cell and at least one cell");
        }
        let grid = &cells[0].grid;
        let mut seen = vec![false; grid.len()];
        for (cell, anchor) in cells.iter().zip(&anchors) {
            grid.ensure_same(&cell.grid)?;
            for i in cell.indices() {
                if seen[i] {
                    return invalid(format!("cells overlap at {:?}", grid.point(i)));
                }
                seen[i] = true;
            }
            match grid.locate(&anchor.0) {
                Locate::Inside(i) if cell.member[i] => {}
                _ => return invalid(format!("anchor {:?} is not inside its cell", anchor.0)),
            }
        }
        Ok(Partition { cells, anchors })
    }

    /// `2^{depth}` equal subdivisions of `[lo, hi]` along every coordinate.
    /// Cells are half-open except on the upper faces of the box; anchors are
    /// cell centres snapped to the nearest grid point of the cell.
    pub fn dyadic_box(grid: &GridSpec, lo: &[f64], hi: &[f64], depth: u32) -> Result<Self> {
        let d = grid.dim();
        if lo.len() != d || hi.len() != d || lo.iter().zip(hi).any(|(a, b)| a >= b) {
            return invalid("box corners must match the grid dimension with lo < hi");
        }
        let per_axis = 1usize << depth;
        let total = per_axis.checked_pow(d as u32).ok_or_else(|| {
            Error::ResourceLimit(format!("depth {depth} gives too many cells"))
        })?;
        let eps = 1e-9 * grid.spacing().iter().cloned().fold(f64::INFINITY, f64::min);
        let width: Vec<f64> = (0..d).map(|k| (hi[k] - lo[k]) / per_axis as f64).collect();
        let cell_of = |x: &[f64]| -> Option<usize> {
            let mut flat = 0;
            for k in 0..d {
                if x[k] < lo[k] - eps || x[k] > hi[k] + eps {
                    return None;
                }
                let c = (((x[k] - lo[k] + eps) / width[k]).floor() as usize).min(per_axis - 1);
                flat = flat * per_axis + c;
            }
            Some(flat)
        };
        let mut members = vec![vec![false; grid.len()]; total];
        for (i, x) in grid.points().enumerate() {
            if let Some(c) = cell_of(&x) {
                members[c][i] = true;
            }
        }
        let mut cells = Vec::with_capacity(total);
        let mut anchors = Vec::with_capacity(total);
        for (flat, member) in members.into_iter().enumerate() {
            let mask = RegionMask::new(grid.clone(), member)?;
            if mask.is_empty() {
                return invalid(format!("depth {depth} produces empty cells at this grid spacing"));
            }
            let mut rest = flat;
            let mut centre = vec![0.0; d];
            for k in (0..d).rev() {
                let c = rest % per_axis;
                rest /= per_axis;
                centre[k] = lo[k] + (c as f64 + 0.5) * width[k];
            }
            let anchor = mask
                .indices()
                .into_iter()
                .min_by(|&a, &b| {
                    dist2(&grid.point(a), &centre).total_cmp(&dist2(&grid.point(b), &centre))
                })
                .expect("non-empty cell");
            anchors.push(grid.element(anchor));
            cells.push(mask);
        }
        Partition::new(cells, anchors)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Union of the cells.
    pub fn support(&self) -> RegionMask {
        self.cells
            .iter()
            .fold(RegionMask::empty(&self.cells[0].grid), |acc, c| acc.union(c))
    }
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `Σ_j P_{u_j} A_j P_{u_j}`.
pub fn envelope_sum(partition: &Partition, locals: &[OperatorMatrix]) -> Result<OperatorMatrix> {
    if locals.len() != partition.len() {
        return invalid(format!(
            "{} local operators for {} cells",
            locals.len(),
            partition.len()
        ));
    }
    let grid = &partition.cells[0].grid;
    let mut out = DMatrix::zeros(grid.len(), grid.len());
    for (cell, a) in partition.cells.iter().zip(locals) {
        grid.ensure_same(&a.grid)?;
        let idx = cell.indices();
        for &i in &idx {
            for &j in &idx {
                out[(i, j)] = a.entries[(i, j)];
            }
        }
    }
    OperatorMatrix::new(grid.clone(), out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub depth: u32,
    pub norm: f64,
    pub proxy: f64,
}

/// Envelopes of `rule` over dyadic partitions of `[lo, hi]`, compared with
/// `P A P` where `P` projects onto the box.
pub fn envelope_refine(
    target: &OperatorMatrix,
    rule: impl Fn(&GroupElement) -> Result<OperatorMatrix>,
    lo: &[f64],
    hi: &[f64],
    depths: &[u32],
    rank: usize,
) -> Result<Vec<ConvergenceRow>> {
    depths
        .iter()
        .map(|&depth| {
            let partition = Partition::dyadic_box(&target.grid, lo, hi, depth)?;
            let locals = partition.anchors.iter().map(&rule).collect::<Result<Vec<_>>>()?;
            let env = envelope_sum(&partition, &locals)?;
            let idx = partition.support().indices();
            let diff = env.block(&idx, &idx) - target.block(&idx, &idx);
            Ok(ConvergenceRow {
                depth,
                norm: largest_singular_value(&diff),
                proxy: proxy_of(&diff, rank),
            })
        })
        .collect()
}

/// Value of an operator field at one `(t, g)`.
#[derive(Debug, Clone)]
pub enum FieldEntry {
    /// A full-size operator, possibly shared between many points.
    Shared(Arc<OperatorMatrix>),
    /// An operator supported on `support × support`.
    Local { support: Vec<usize>, block: DMatrix<f64> },
}

impl FieldEntry {
    /// Rows and columns `idx` of the operator.
    fn restrict(&self, idx: &[usize]) -> DMatrix<f64> {
        match self {
            FieldEntry::Shared(a) => a.block(idx, idx),
            FieldEntry::Local { support, block } => {
                let pos: Vec<Option<usize>> =
                    idx.iter().map(|i| support.binary_search(i).ok()).collect();
                DMatrix::from_fn(idx.len(), idx.len(), |a, b| match (pos[a], pos[b]) {
                    (Some(i), Some(j)) => block[(i, j)],
                    _ => 0.0,
                })
            }
        }
    }

    pub fn to_operator(&self, grid: &GridSpec) -> OperatorMatrix {
        match self {
            FieldEntry::Shared(a) => (**a).clone(),
            FieldEntry::Local { support, block } => {
                let mut m = DMatrix::zeros(grid.len(), grid.len());
                for (a, &i) in support.iter().enumerate() {
                    for (b, &j) in support.iter().enumerate() {
                        m[(i, j)] = block[(a, b)];
                    }
                }
                OperatorMatrix { grid: grid.clone(), entries: m }
            }
        }
    }
}

/// How window blocks of a symbol field become operators on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Embedding {
    /// `π(s) S(s) π(s)⁻¹`: the block is carried back onto `F_s`.
    Covariant,
    /// The block's entry at the identity times the identity on `F_s`.
    Frozen,
}

/// Operators `A(t,g)` over dyadic levels and a lattice of lattice points.
#[derive(Debug, Clone)]
pub struct OperatorField {
    pub grid: GridSpec,
    pub window: WindowSpec,
    pub t_levels: Vec<f64>,
    pub lattice: Vec<GroupElement>,
    pub entries: Vec<Vec<FieldEntry>>,
}

impl OperatorField {
    pub fn constant(
        a: &OperatorMatrix,
        window: &WindowSpec,
        t_levels: &[f64],
        lattice: &[GroupElement],
    ) -> Result<Self> {
        check_levels(t_levels)?;
        a.grid.ensure_same(&window.mask.grid)?;
        let shared = Arc::new(a.clone());
        Ok(OperatorField {
            grid: a.grid.clone(),
            window: window.clone(),
            t_levels: t_levels.to_vec(),
            lattice: lattice.to_vec(),
            entries: vec![vec![FieldEntry::Shared(shared); lattice.len()]; t_levels.len()],
        })
    }

    pub fn from_symbol_field(field: &SymbolField, embedding: Embedding) -> Result<Self> {
        let grid = field.window.mask.grid.clone();
        let group = grid.group;
        let win = field.window.indices();
        let centre = match grid.locate(&group.identity().0) {
            Locate::Inside(e) => win.binary_search(&e).ok(),
            _ => None,
        };
        let mut entries = Vec::with_capacity(field.t_levels.len());
        for (level, &t) in field.t_levels.iter().enumerate() {
            let mut row = Vec::with_capacity(field.lattice.len());
            for (k, g) in field.lattice.iter().enumerate() {
                let s = ScaledElement::new(t, g.clone())?;
                let support = transform_mask(&s, &field.window.mask)?.mask.indices();
                let sym = field.block(level, k);
                let block = match embedding {
                    Embedding::Covariant => {
                        // entry (x, y) is S(τ_{1/t}(g⁻¹x), τ_{1/t}(g⁻¹y))
                        let pos: Vec<usize> = support
                            .iter()
                            .map(|&x| match grid.locate(&group.pull_back_raw(&s, &grid.point(x))) {
                                Locate::Inside(j) => win.binary_search(&j).ok(),
                                _ => None,
                            })
                            .collect::<Option<_>>()
                            .ok_or_else(|| Error::Format("window point lost in embedding".into()))?;
                        DMatrix::from_fn(support.len(), support.len(), |a, b| sym[(pos[a], pos[b])])
                    }
                    Embedding::Frozen => {
                        let c = centre.ok_or_else(|| {
                            Error::InvalidArgument("window does not contain the identity".into())
                        })?;
                        DMatrix::identity(support.len(), support.len()) * sym[(c, c)]
                    }
                };
                row.push(FieldEntry::Local { support, block });
            }
            entries.push(row);
        }
        Ok(OperatorField {
            grid,
            window: field.window.clone(),
            t_levels: field.t_levels.clone(),
            lattice: field.lattice.clone(),
            entries,
        })
    }

    /// `(Λ(b)A)(t, b·g) = π(b) A(t,g) π(b)⁻¹` for a lattice translation `b`.
    pub fn translate(&self, b: &GroupElement) -> Result<Self> {
        let group = self.grid.group;
        group.check(b)?;
        if !self.grid.on_lattice(&b.0) {
            return invalid("translation must be a lattice point");
        }
        let image = |i: usize| -> Result<usize> {
            match self.grid.locate(&group.compose_raw(&b.0, &self.grid.point(i))) {
                Locate::Inside(j) => Ok(j),
                _ => invalid(format!("translated point {:?} leaves the grid", self.grid.point(i))),
            }
        };
        let lattice = self
            .lattice
            .iter()
            .map(|g| group.compose(b, g))
            .collect::<Result<Vec<_>>>()?;
        let mut entries = Vec::with_capacity(self.entries.len());
        for row in &self.entries {
            let mut out = Vec::with_capacity(row.len());
            for e in row {
                out.push(match e {
                    FieldEntry::Local { support, block } => {
                        let mut moved: Vec<(usize, usize)> = support
                            .iter()
                            .enumerate()
                            .map(|(a, &i)| Ok((image(i)?, a)))
                            .collect::<Result<_>>()?;
                        moved.sort_unstable();
                        let perm: Vec<usize> = moved.iter().map(|&(_, a)| a).collect();
                        FieldEntry::Local {
                            support: moved.iter().map(|&(j, _)| j).collect(),
                            block: DMatrix::from_fn(perm.len(), perm.len(), |a, c| {
                                block[(perm[a], perm[c])]
                            }),
                        }
                    }
                    FieldEntry::Shared(a) => {
                        let n = self.grid.len();
                        let map = (0..n).map(|i| image(i).ok()).collect::<Vec<_>>();
                        let mut m = DMatrix::zeros(n, n);
                        for i in 0..n {
                            for j in 0..n {
                                if let (Some(x), Some(y)) = (map[i], map[j]) {
                                    m[(x, y)] = a.entries[(i, j)];
                                }
                            }
                        }
                        FieldEntry::Shared(Arc::new(OperatorMatrix {
                            grid: self.grid.clone(),
                            entries: m,
                        }))
                    }
                });
            }
            entries.push(out);
        }
        Ok(OperatorField {
            grid: self.grid.clone(),
            window: self.window.clone(),
            t_levels: self.t_levels.clone(),
            lattice,
            entries,
        })
    }
}

/// Output of [`inverse_covariant`].
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub operator: OperatorMatrix,
    /// Points where the windows tile with constant multiplicity; the
    /// reconstruction is normalized there.
    pub covered: RegionMask,
    /// Windows containing each covered point at the finest level.
    pub multiplicity: usize,
}

fn reconstruct_level(field: &OperatorField, level: usize) -> Result<Reconstruction> {
    let grid = &field.grid;
    let group = grid.group;
    let t = field.t_levels[level];
    let d = grid.dim();
    if field.lattice.is_empty() {
        return invalid("operator field has an empty lattice");
    }
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for g in &field.lattice {
        for k in 0..d {
            lo[k] = lo[k].min(g.0[k]);
            hi[k] = hi[k].max(g.0[k]);
        }
    }
    let windows = field
        .lattice
        .iter()
        .map(|g| Ok(transform_mask(&ScaledElement::new(t, g.clone())?, &field.window.mask)?.mask))
        .collect::<Result<Vec<_>>>()?;
    let mut mult = vec![0usize; grid.len()];
    for w in &windows {
        for i in w.indices() {
            mult[i] += 1;
        }
    }
    // interior: points whose own window at scale t stays in the lattice's box
    let tol = 1e-9;
    let shape = field.window.indices();
    let interior = RegionMask::from_predicate(grid, |x| {
        let s = ScaledElement { t, g: GroupElement(x.to_vec()) };
        shape.iter().all(|&j| {
            let y = group.act_point_raw(&s, &grid.point(j));
            (0..d).all(|k| y[k] >= lo[k] - tol && y[k] <= hi[k] + tol)
        })
    });
    let idx = interior.indices();
    let (min, max) = idx
        .iter()
        .fold((usize::MAX, 0), |(a, b), &i| (a.min(mult[i]), b.max(mult[i])));
    if idx.is_empty() || min != max || min == 0 {
        return invalid(format!(
            "windows at t = {t} do not tile the lattice interior: {} interior points, \
             coverage multiplicity ranges over [{}, {max}]",
            idx.len(),
            if idx.is_empty() { 0 } else { min },
        ));
    }
    let weight = 1.0 / max as f64;
    let mut out = DMatrix::zeros(grid.len(), grid.len());
    for (w, entry) in windows.iter().zip(&field.entries[level]) {
        let support = w.indices();
        let block = entry.restrict(&support);
        for (a, &i) in support.iter().enumerate() {
            for (b, &j) in support.iter().enumerate() {
                out[(i, j)] += weight * block[(a, b)];
            }
        }
    }
    Ok(Reconstruction {
        operator: OperatorMatrix { grid: grid.clone(), entries: out },
        covered: interior,
        multiplicity: max,
    })
}

/// Reconstructs an operator from a field.
///
/// `Hardy` takes the finest level, or with `extrapolate` the linear
/// extrapolation to `t = 0` of the last two levels. `Haar` averages all
/// levels with the weights `dt / t^{k+1}`. The covered region is where every
/// level used is normalized.
pub fn inverse_covariant(
    field: &OperatorField,
    kind: PairingKind,
    extrapolate: bool,
) -> Result<Reconstruction> {
    let n = field.t_levels.len();
    if n < 2 {
        return invalid("the inverse covariant transform needs at least two t-levels");
    }
    match kind {
        PairingKind::Hardy if !extrapolate => reconstruct_level(field, n - 1),
        PairingKind::Hardy => {
            let coarse = reconstruct_level(field, n - 2)?;
            let fine = reconstruct_level(field, n - 1)?;
            let (tc, tf) = (field.t_levels[n - 2], field.t_levels[n - 1]);
            let entries = fine.operator.entries.zip_map(&coarse.operator.entries, |f, c| {
                richardson(c, tc, f, tf)
            });
            Ok(Reconstruction {
                operator: OperatorMatrix { grid: field.grid.clone(), entries },
                covered: fine.covered.intersection(&coarse.covered),
                multiplicity: fine.multiplicity,
            })
        }
        PairingKind::Haar => {
            let k = field.grid.group.homogeneous_dimension() as i32;
            let weights: Vec<f64> = trapezoid_weights(&field.t_levels)
                .iter()
                .zip(&field.t_levels)
                .map(|(w, t)| w / t.powi(k + 1))
                .collect();
            let total: f64 = weights.iter().sum();
            let mut acc: Option<Reconstruction> = None;
            for level in 0..n {
                let r = reconstruct_level(field, level)?;
                let scaled = r.operator.entries * (weights[level] / total);
                acc = Some(match acc {
                    None => Reconstruction {
                        operator: OperatorMatrix { grid: field.grid.clone(), entries: scaled },
                        ..r
                    },
                    Some(prev) => Reconstruction {
                        operator: OperatorMatrix {
                            grid: field.grid.clone(),
                            entries: prev.operator.entries + scaled,
                        },
                        covered: prev.covered.intersection(&r.covered),
                        multiplicity: r.multiplicity,
                    },
                });
            }
            Ok(acc.expect("at least two levels"))
        }
    }
}
