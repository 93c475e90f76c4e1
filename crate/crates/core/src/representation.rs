//! The representation `π(t,g)` of `G ⋊ ℝ₊` on sampled functions,
//!
//! ```text
//! [π(t,g) f](x) = t^{-k/p} f(τ_{1/t}(g⁻¹·x)),
//! ```
//!
//! and the induced action `A ↦ π((t,g)⁻¹) A π(t',g')` on operator matrices.
//!
//! In [`RepMode::ExactAligned`] the scale must be a power of two and `g` a
//! lattice point. For `t ≤ 1` every pulled-back grid point is again a
//! lattice point, so the matrix has at most one entry per row and all group
//! identities hold to round-off. For `t > 1` pulled-back points may fall
//! between lattice points; those rows are left empty (the point is not
//! resolved at this scale), which makes `π(s)·π(s⁻¹)` the identity on
//! interior points.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::function_space::{GridSpec, Locate, SampledFunction};
use crate::group::ScaledElement;
use crate::operator::OperatorMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum RepMode {
    #[default]
    ExactAligned,
    Interpolated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepParams {
    pub grid: GridSpec,
    pub p: f64,
    pub mode: RepMode,
}

impl RepParams {
    pub fn new(grid: &GridSpec, p: f64) -> Self {
        RepParams {
            grid: grid.clone(),
            p,
            mode: RepMode::ExactAligned,
        }
    }

    pub fn interpolated(grid: &GridSpec, p: f64) -> Self {
        RepParams {
            grid: grid.clone(),
            p,
            mode: RepMode::Interpolated,
        }
    }
}

/// Sparse row-major matrix of a group action in the grid basis, stored as
/// `2^exponent` times a matrix of sampling weights (0/1 in exact mode).
///
/// Keeping the factor `t^{-k/p}` separate lets products such as
/// `π(s⁻¹)·X·π(s)` combine the exponents before rounding, so they come out
/// exactly 0/1 where the continuum identity says so.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionMatrix {
    n: usize,
    rows: Vec<Vec<(usize, f64)>>,
    exponent: f64,
}

impl ActionMatrix {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Sampling weights of row `i`, without the common factor.
    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    /// The common factor `t^{-k/p}`.
    pub fn factor(&self) -> f64 {
        self.exponent.exp2()
    }

    /// Common factor of a product `self · X · other`.
    pub fn joint_factor(&self, other: &ActionMatrix) -> f64 {
        (self.exponent + other.exponent).exp2()
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let f = self.factor();
        self.rows
            .iter()
            .map(|r| f * r.iter().map(|&(j, c)| c * v[j]).sum::<f64>())
            .collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let f = self.factor();
        let mut m = DMatrix::zeros(self.n, self.n);
        for (i, r) in self.rows.iter().enumerate() {
            for &(j, c) in r {
                m[(i, j)] += f * c;
            }
        }
        m
    }

    /// Column lists of the sampling weights: `columns()[j]` holds `(i, w)`
    /// for every nonzero `(i, j)`.
    pub fn columns(&self) -> Vec<Vec<(usize, f64)>> {
        let mut cols = vec![Vec::new(); self.n];
        for (i, r) in self.rows.iter().enumerate() {
            for &(j, c) in r {
                cols[j].push((i, c));
            }
        }
        cols
    }

    pub fn max_row_nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).max().unwrap_or(0)
    }
}

/// Whether `t` is `2^j` for an integer `j`.
pub fn is_dyadic(t: f64) -> bool {
    if !(t > 0.0 && t.is_finite()) {
        return false;
    }
    let l = t.log2();
    (l - l.round()).abs() < 1e-12 && l.abs() <= 60.0
}

fn check_alignment(params: &RepParams, s: &ScaledElement) -> Result<()> {
    params.grid.group.check(&s.g)?;
    if params.mode == RepMode::ExactAligned {
        if !is_dyadic(s.t) {
            return invalid(format!("scale {} is not a power of two", s.t));
        }
        if !params.grid.on_lattice(&s.g.0) {
            return invalid(format!("group element {:?} is not a lattice point", s.g.0));
        }
    }
    Ok(())
}

/// Matrix of `π(s)` in the grid basis.
pub fn act_matrix(params: &RepParams, s: &ScaledElement) -> Result<ActionMatrix> {
    check_alignment(params, s)?;
    let grid = &params.grid;
    let group = grid.group;
    let k = group.homogeneous_dimension() as f64;
    let exponent = -s.t.log2() * k / params.p;
    let mut rows = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let y = group.pull_back_raw(s, &grid.point(i));
        let row = match params.mode {
            RepMode::ExactAligned => match grid.locate(&y) {
                Locate::Inside(j) => vec![(j, 1.0)],
                Locate::Outside => Vec::new(),
                Locate::OffLattice if s.t > 1.0 => Vec::new(),
                Locate::OffLattice => {
                    return invalid(format!(
                        "alignment violation: grid point {:?} pulls back off the lattice",
                        grid.point(i)
                    ))
                }
            },
            RepMode::Interpolated => interpolation_row(grid, &y),
        };
        rows.push(row);
    }
    Ok(ActionMatrix { n: grid.len(), rows, exponent })
}

/// Multilinear interpolation weights of the grid samples at `y`; corners
/// outside the extent contribute zero.
fn interpolation_row(grid: &GridSpec, y: &[f64]) -> Vec<(usize, f64)> {
    let m = grid.dim();
    let mut base = Vec::with_capacity(m);
    let mut frac = Vec::with_capacity(m);
    for (v, h) in y.iter().zip(grid.spacing()) {
        let q = v / h;
        let fl = q.floor();
        base.push(fl as i64);
        frac.push(q - fl);
    }
    let mut out = Vec::new();
    for corner in 0..(1usize << m) {
        let mut w = 1.0;
        let mut idx = base.clone();
        for c in 0..m {
            if corner >> c & 1 == 1 {
                idx[c] += 1;
                w *= frac[c];
            } else {
                w *= 1.0 - frac[c];
            }
        }
        if w.abs() < 1e-15 {
            continue;
        }
        if let Some(j) = grid.index_of(&idx) {
            out.push((j, w));
        }
    }
    out
}

pub fn act(params: &RepParams, s: &ScaledElement, f: &SampledFunction) -> Result<SampledFunction> {
    params.grid.ensure_same(&f.grid)?;
    let m = act_matrix(params, s)?;
    Ok(SampledFunction {
        grid: f.grid.clone(),
        values: m.apply(&f.values),
        p: f.p,
    })
}

/// `π(left⁻¹) · A · π(right)`.
pub fn double_act(
    params: &RepParams,
    left: &ScaledElement,
    right: &ScaledElement,
    a: &OperatorMatrix,
) -> Result<OperatorMatrix> {
    params.grid.ensure_same(&a.grid)?;
    let group = params.grid.group;
    let l = act_matrix(params, &group.scaled_inverse(left)?)?;
    let r = act_matrix(params, right)?;
    Ok(OperatorMatrix {
        grid: a.grid.clone(),
        entries: sandwich(&l, &a.entries, &r),
    })
}

/// `L · A · R` for sparse `L`, `R`.
pub(crate) fn sandwich(l: &ActionMatrix, a: &DMatrix<f64>, r: &ActionMatrix) -> DMatrix<f64> {
    let n = a.nrows();
    let mut la = DMatrix::zeros(n, a.ncols());
    for i in 0..n {
        for &(k, c) in l.row(i) {
            for j in 0..a.ncols() {
                la[(i, j)] += c * a[(k, j)];
            }
        }
    }
    let mut out = DMatrix::zeros(n, a.ncols());
    for b in 0..r.dim() {
        for &(j, d) in r.row(b) {
            let src = la.column(b).clone_owned();
            let mut dst = out.column_mut(j);
            dst.axpy(d, &src, 1.0);
        }
    }
    out * l.joint_factor(r)
}

/// Nonzero entries `(i, j, v)` of `π(left⁻¹) · diag(d) · π(right)`; usable
/// on grids too large for dense matrices.
pub fn double_act_diagonal(
    params: &RepParams,
    left: &ScaledElement,
    right: &ScaledElement,
    diag: &[f64],
) -> Result<Vec<(usize, usize, f64)>> {
    if diag.len() != params.grid.len() {
        return invalid("diagonal length does not match grid");
    }
    let group = params.grid.group;
    let l = act_matrix(params, &group.scaled_inverse(left)?)?;
    let r = act_matrix(params, right)?;
    let f = l.joint_factor(&r);
    let mut acc = std::collections::BTreeMap::new();
    for i in 0..l.dim() {
        for &(a, c) in l.row(i) {
            if diag[a] == 0.0 {
                continue;
            }
            for &(j, d) in r.row(a) {
                *acc.entry((i, j)).or_insert(0.0) += f * c * diag[a] * d;
            }
        }
    }
    Ok(acc
        .into_iter()
        .filter(|&(_, v)| v != 0.0)
        .map(|((i, j), v)| (i, j, v))
        .collect())
}
