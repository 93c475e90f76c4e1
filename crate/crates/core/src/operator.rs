//! Dense operators on a grid and the operator classes used for localization
//! experiments: multiplication, group convolution, the discrete Hilbert
//! transform, finite-rank operators and region projections. Also hosts the
//! essential-norm proxy and the local-type and self-covering checks.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::function_space::{GridSpec, Locate, RegionMask, SampledFunction};
use crate::group::{GroupDescriptor, GroupElement, ScaledElement};
use crate::representation::{act_matrix, is_dyadic, RepParams};

/// A dense linear map on the grid. Entries already carry the cell volume, so
/// `(A f)_i = Σ_j A_ij f_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub grid: GridSpec,
    pub entries: DMatrix<f64>,
}

impl OperatorMatrix {
    pub fn new(grid: GridSpec, entries: DMatrix<f64>) -> Result<Self> {
        let n = grid.len();
        if entries.nrows() != n || entries.ncols() != n {
            return invalid(format!(
                "matrix is {}x{}, grid has {n} points",
                entries.nrows(),
                entries.ncols()
            ));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return invalid("matrix has non-finite entries");
        }
        Ok(OperatorMatrix { grid, entries })
    }

    pub fn identity(grid: &GridSpec) -> Self {
        OperatorMatrix {
            grid: grid.clone(),
            entries: DMatrix::identity(grid.len(), grid.len()),
        }
    }

    pub fn zeros(grid: &GridSpec) -> Self {
        OperatorMatrix {
            grid: grid.clone(),
            entries: DMatrix::zeros(grid.len(), grid.len()),
        }
    }

    pub fn diagonal(grid: &GridSpec, d: &[f64]) -> Self {
        OperatorMatrix {
            grid: grid.clone(),
            entries: DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(d)),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn apply(&self, f: &SampledFunction) -> Result<SampledFunction> {
        self.grid.ensure_same(&f.grid)?;
        let v = &self.entries * nalgebra::DVector::from_column_slice(&f.values);
        Ok(SampledFunction {
            grid: f.grid.clone(),
            values: v.as_slice().to_vec(),
            p: f.p,
        })
    }

    pub fn sub(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        self.grid.ensure_same(&other.grid)?;
        Ok(OperatorMatrix {
            grid: self.grid.clone(),
            entries: &self.entries - &other.entries,
        })
    }

    pub fn add(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        self.grid.ensure_same(&other.grid)?;
        Ok(OperatorMatrix {
            grid: self.grid.clone(),
            entries: &self.entries + &other.entries,
        })
    }

    pub fn scaled(&self, c: f64) -> OperatorMatrix {
        OperatorMatrix {
            grid: self.grid.clone(),
            entries: &self.entries * c,
        }
    }

    pub fn compose(&self, other: &OperatorMatrix) -> Result<OperatorMatrix> {
        self.grid.ensure_same(&other.grid)?;
        Ok(OperatorMatrix {
            grid: self.grid.clone(),
            entries: &self.entries * &other.entries,
        })
    }

    /// Operator (spectral) norm.
    pub fn norm(&self) -> f64 {
        largest_singular_value(&self.entries)
    }

    pub fn max_abs_diff(&self, other: &OperatorMatrix) -> f64 {
        (&self.entries - &other.entries).amax()
    }

    /// Submatrix on `rows × cols` (grid indices).
    pub fn block(&self, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(rows.len(), cols.len(), |i, j| self.entries[(rows[i], cols[j])])
    }
}

/// A bounded window `F_e ∋ e` together with its continuous shape, used for
/// transforms at arbitrary scale.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSpec {
    pub shape: WindowShape,
    pub mask: RegionMask,
    pub r_cover: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum WindowShape {
    /// `|x_c| ≤ radius^{deg c}` for every coordinate.
    HomogeneousBox { group: GroupDescriptor, radius: f64 },
    /// Membership read off a grid mask; off-lattice points are outside.
    Mask(RegionMask),
}

impl WindowShape {
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            WindowShape::HomogeneousBox { group, radius } => group
                .coordinate_degrees()
                .iter()
                .zip(x)
                .all(|(&d, v)| v.abs() <= radius.powi(d) * (1.0 + 1e-12) + 1e-12),
            WindowShape::Mask(m) => match m.grid.locate(x) {
                Locate::Inside(i) => m.member[i],
                _ => false,
            },
        }
    }
}

impl WindowSpec {
    pub fn homogeneous_box(grid: &GridSpec, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return invalid("window radius must be positive");
        }
        let shape = WindowShape::HomogeneousBox {
            group: grid.group,
            radius,
        };
        let mask = RegionMask::from_predicate(grid, |x| shape.contains(x));
        Self::from_parts(grid, shape, mask)
    }

    pub fn from_mask(mask: RegionMask) -> Result<Self> {
        let grid = mask.grid.clone();
        Self::from_parts(&grid, WindowShape::Mask(mask.clone()), mask)
    }

    fn from_parts(grid: &GridSpec, shape: WindowShape, mask: RegionMask) -> Result<Self> {
        let origin = grid.group.identity();
        match grid.locate(&origin.0) {
            Locate::Inside(i) if mask.member[i] => {}
            _ => return invalid("window must contain the identity grid point"),
        }
        // bounded: no member on the outermost layer of the grid
        for i in mask.indices() {
            let j = grid.multi_index(i);
            for (c, &jc) in j.iter().enumerate() {
                let lo = (-grid.extent()[c] / grid.spacing()[c] - 1e-9).ceil() as i64;
                if jc == lo || jc == lo + grid.counts()[c] as i64 - 1 {
                    return invalid("window touches the grid boundary");
                }
            }
        }
        Ok(WindowSpec {
            shape,
            mask,
            r_cover: None,
        })
    }

    pub fn indices(&self) -> Vec<usize> {
        self.mask.indices()
    }

    pub fn size(&self) -> usize {
        self.mask.count()
    }

    /// `F_(t,g)` for an arbitrary scale: grid points whose pull-back lies in
    /// the continuous window shape.
    pub fn transformed(&self, s: &ScaledElement) -> RegionMask {
        let grid = &self.mask.grid;
        let group = grid.group;
        RegionMask::from_predicate(grid, |x| self.shape.contains(&group.pull_back_raw(s, x)))
    }
}

/// `diag(a(x_j))`.
pub fn multiplication_operator(a: &SampledFunction) -> OperatorMatrix {
    OperatorMatrix::diagonal(&a.grid, &a.values)
}

/// Left-invariant convolution `(Kf)(g) = Σ_h k(h⁻¹g) f(h) |cell|`.
pub fn group_convolution(kernel: &SampledFunction) -> Result<OperatorMatrix> {
    let grid = &kernel.grid;
    let group = grid.group;
    let n = grid.len();
    let vol = grid.cell_volume();
    let pts: Vec<Vec<f64>> = grid.points().collect();
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        let hinv: Vec<f64> = pts[j].iter().map(|v| -v).collect();
        for i in 0..n {
            let d = group.compose_raw(&hinv, &pts[i]);
            match grid.locate(&d) {
                Locate::Inside(q) => m[(i, j)] = kernel.values[q] * vol,
                Locate::Outside => {}
                Locate::OffLattice => {
                    return invalid("grid is not closed under the group law; kernel undefined")
                }
            }
        }
    }
    Ok(OperatorMatrix { grid: grid.clone(), entries: m })
}

/// Discrete Hilbert transform on `ℝ`: `H_jk = h / (π (x_j − x_k))`, zero diagonal.
pub fn hilbert_transform(grid: &GridSpec) -> Result<OperatorMatrix> {
    if grid.group != GroupDescriptor::euclidean(1) {
        return invalid("the Hilbert transform needs a Euclidean(1) grid");
    }
    let h = grid.spacing()[0];
    let n = grid.len();
    let x: Vec<f64> = grid.points().map(|p| p[0]).collect();
    let m = DMatrix::from_fn(n, n, |j, k| {
        if j == k {
            0.0
        } else {
            h / (std::f64::consts::PI * (x[j] - x[k]))
        }
    });
    Ok(OperatorMatrix { grid: grid.clone(), entries: m })
}

/// `Σ_i col_i ⊗ row_i`, acting as `f ↦ Σ_i col_i ⟨row_i, f⟩`.
pub fn finite_rank(
    grid: &GridSpec,
    columns: &[SampledFunction],
    rows: &[SampledFunction],
) -> Result<OperatorMatrix> {
    if columns.len() != rows.len() {
        return invalid(format!(
            "{} columns but {} rows",
            columns.len(),
            rows.len()
        ));
    }
    let n = grid.len();
    let vol = grid.cell_volume();
    let mut m = DMatrix::zeros(n, n);
    for (c, r) in columns.iter().zip(rows) {
        grid.ensure_same(&c.grid)?;
        grid.ensure_same(&r.grid)?;
        let cv = nalgebra::DVector::from_column_slice(&c.values);
        let rv = nalgebra::DVector::from_column_slice(&r.values);
        m.ger(vol, &cv, &rv, 1.0);
    }
    Ok(OperatorMatrix { grid: grid.clone(), entries: m })
}

/// The grid shift `π(1,b)`.
pub fn shift_operator(grid: &GridSpec, b: &GroupElement) -> Result<OperatorMatrix> {
    let m = act_matrix(&RepParams::new(grid, 2.0), &ScaledElement::shift(b.clone()))?;
    Ok(OperatorMatrix { grid: grid.clone(), entries: m.to_dense() })
}

/// Result of [`transform_mask`].
#[derive(Debug, Clone, PartialEq)]
pub struct TransformedMask {
    pub mask: RegionMask,
    /// Members of `F` whose image `g·τ_t(f)` left the grid extent.
    pub truncated: usize,
}

/// `F_(t,g) = (t,g)·F`: the grid points `x` with `τ_{1/t}(g⁻¹x) ∈ F`.
pub fn transform_mask(s: &ScaledElement, f: &RegionMask) -> Result<TransformedMask> {
    let grid = &f.grid;
    let group = grid.group;
    group.check(&s.g)?;
    if !is_dyadic(s.t) || !grid.on_lattice(&s.g.0) {
        return invalid("transform_mask needs a dyadic scale and a lattice point");
    }
    let member = grid
        .points()
        .map(|x| match grid.locate(&group.pull_back_raw(s, &x)) {
            Locate::Inside(j) => f.member[j],
            _ => false,
        })
        .collect();
    let truncated = f
        .indices()
        .into_iter()
        .filter(|&j| grid.locate(&group.act_point_raw(s, &grid.point(j))) == Locate::Outside)
        .count();
    Ok(TransformedMask {
        mask: RegionMask { grid: grid.clone(), member },
        truncated,
    })
}

/// Diagonal 0/1 matrix of `P_F`.
pub fn projection_matrix(f: &RegionMask) -> OperatorMatrix {
    let d: Vec<f64> = f.member.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    OperatorMatrix::diagonal(&f.grid, &d)
}

/// Singular values in descending order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn largest_singular_value(m: &DMatrix<f64>) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// `σ_{rank+1}(A)`: the operator-norm distance from `A` to matrices of rank
/// at most `rank`. With `rank = 0` this is `‖A‖`.
pub fn enorm_proxy(a: &OperatorMatrix, rank: usize) -> Result<f64> {
    if rank >= a.dim() {
        return invalid(format!("proxy rank {rank} must be below N = {}", a.dim()));
    }
    Ok(proxy_of(&a.entries, rank))
}

/// `σ_{rank+1}` of an arbitrary (possibly rectangular) block; zero past its size.
pub fn proxy_of(m: &DMatrix<f64>, rank: usize) -> f64 {
    singular_values(m).get(rank).copied().unwrap_or(0.0)
}

/// Largest `σ_{rank+1}(P_{F₁} A P_{F₂})` over seeded random pairs of
/// axis-aligned boxes separated by at least `separation` along one axis.
pub fn local_type_score(
    a: &OperatorMatrix,
    separation: f64,
    rank: usize,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    let grid = &a.grid;
    let hmax = grid.spacing().iter().cloned().fold(0.0, f64::max);
    if !(separation >= 2.0 * hmax * (1.0 - 1e-12)) {
        return invalid(format!("separation {separation} is below 2h"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let (f1, f2) = sample_separated_boxes(grid, separation, &mut rng)?;
        let block = a.block(&f1.indices(), &f2.indices());
        worst = worst.max(proxy_of(&block, rank));
    }
    Ok(worst)
}

fn sample_separated_boxes(
    grid: &GridSpec,
    separation: f64,
    rng: &mut ChaCha8Rng,
) -> Result<(RegionMask, RegionMask)> {
    let m = grid.dim();
    let axis = rng.gen_range(0..m);
    let n = grid.counts()[axis] as i64;
    let gap = (separation / grid.spacing()[axis] - 1e-9).ceil() as i64;
    let max_len = (n / 4).max(2);
    if 2 + gap + 2 > n {
        return invalid("separation does not fit in the grid");
    }
    let (len1, len2) = loop {
        let l1 = rng.gen_range(2..=max_len);
        let l2 = rng.gen_range(2..=max_len);
        if l1 + l2 + gap <= n {
            break (l1, l2);
        }
    };
    let start = rng.gen_range(0..=(n - len1 - len2 - gap));
    let (first, second) = ((start, start + len1 - 1), (start + len1 - 1 + gap, start + len1 - 1 + gap + len2 - 1));
    let (r1, r2) = if rng.gen_bool(0.5) { (first, second) } else { (second, first) };
    let base = (-grid.extent()[axis] / grid.spacing()[axis] - 1e-9).ceil() as i64;
    let make = |range: (i64, i64)| {
        let member = (0..grid.len())
            .map(|i| {
                let j = grid.multi_index(i)[axis] - base;
                j >= range.0 && j <= range.1
            })
            .collect();
        RegionMask { grid: grid.clone(), member }
    };
    Ok((make(r1), make(r2)))
}

/// Outcome of one sampled pair in [`self_covering_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct CoveringWitness {
    pub g1: GroupElement,
    pub g2: GroupElement,
    pub witness: Option<GroupElement>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfCoveringReport {
    pub covering: bool,
    pub pairs: Vec<CoveringWitness>,
}

/// Searches, for intersecting unit-scale translates `F_(1,e)`, `F_(1,g₂)`, a
/// lattice point `g` with `F_(r,g)` covering their union. `g₁ = e` suffices by
/// left invariance. With `samples == 0` or `samples` at least the number of
/// candidate `g₂`, every candidate is checked.
pub fn self_covering_check(
    window: &WindowSpec,
    r: f64,
    samples: usize,
    seed: u64,
) -> Result<SelfCoveringReport> {
    if !(r > 0.0) {
        return invalid("covering scale must be positive");
    }
    let grid = &window.mask.grid;
    let group = grid.group;
    let e = group.identity();
    let base = window.transformed(&ScaledElement::shift(e.clone()));
    let mut candidates: Vec<usize> = (0..grid.len())
        .filter(|&i| {
            window
                .transformed(&ScaledElement::shift(grid.element(i)))
                .intersects(&base)
        })
        .collect();
    if samples > 0 && samples < candidates.len() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut chosen = Vec::with_capacity(samples);
        for _ in 0..samples {
            let k = rng.gen_range(0..candidates.len());
            chosen.push(candidates.swap_remove(k));
        }
        chosen.sort_unstable();
        candidates = chosen;
    }
    let mut pairs = Vec::with_capacity(candidates.len());
    for i in candidates {
        let g2 = grid.element(i);
        let union = base.union(&window.transformed(&ScaledElement::shift(g2.clone())));
        let members: Vec<Vec<f64>> = union.indices().into_iter().map(|j| grid.point(j)).collect();
        let mut search = vec![e.clone()];
        search.extend(union.indices().into_iter().map(|j| grid.element(j)));
        let witness = search.into_iter().find(|g| {
            let s = ScaledElement { t: r, g: g.clone() };
            members
                .iter()
                .all(|x| window.shape.contains(&group.pull_back_raw(&s, x)))
        });
        pairs.push(CoveringWitness { g1: e.clone(), g2, witness });
    }
    Ok(SelfCoveringReport {
        covering: pairs.iter().all(|p| p.witness.is_some()),
        pairs,
    })
}
