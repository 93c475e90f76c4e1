//! Nilpotent groups in exponential coordinates and their dilation
//! semidirect products `G ⋊ ℝ₊`.
//!
//! Two groups are supported: Euclidean `ℝⁿ` (one layer, law is addition) and
//! the Heisenberg group `ℍⁿ` with coordinates `(s, x₁..xₙ, y₁..yₙ)` and law
//!
//! ```text
//! (s,x,y)·(s',x',y') = (s + s' + ½(x·y' − x'·y), x + x', y + y')
//! ```
//!
//! Dilations `τ_t` scale the `j`-th layer by `tʲ`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Group descriptor; serializes as `{"kind": "euclidean"|"heisenberg", "n": n}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GroupDescriptor {
    Euclidean { n: usize },
    Heisenberg { n: usize },
}

impl GroupDescriptor {
    pub fn euclidean(n: usize) -> Self {
        GroupDescriptor::Euclidean { n }
    }

    pub fn heisenberg(n: usize) -> Self {
        GroupDescriptor::Heisenberg { n }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            GroupDescriptor::Euclidean { n } | GroupDescriptor::Heisenberg { n } if n == 0 => {
                invalid("group parameter n must be positive")
            }
            _ => Ok(()),
        }
    }

    /// Topological dimension `m`.
    pub fn dim(&self) -> usize {
        match *self {
            GroupDescriptor::Euclidean { n } => n,
            GroupDescriptor::Heisenberg { n } => 2 * n + 1,
        }
    }

    /// Dimensions of the graded layers `V_1, V_2, …`.
    pub fn layers(&self) -> Vec<usize> {
        match *self {
            GroupDescriptor::Euclidean { n } => vec![n],
            GroupDescriptor::Heisenberg { n } => vec![2 * n, 1],
        }
    }

    /// `k = Σ_j j·dim V_j`.
    pub fn homogeneous_dimension(&self) -> usize {
        self.layers()
            .iter()
            .enumerate()
            .map(|(j, d)| (j + 1) * d)
            .sum()
    }

    /// Layer degree of each coordinate, in coordinate order.
    pub fn coordinate_degrees(&self) -> Vec<i32> {
        match *self {
            GroupDescriptor::Euclidean { n } => vec![1; n],
            GroupDescriptor::Heisenberg { n } => {
                let mut d = vec![1; 2 * n + 1];
                d[0] = 2;
                d
            }
        }
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement(vec![0.0; self.dim()])
    }

    pub fn element(&self, coords: Vec<f64>) -> Result<GroupElement> {
        let g = GroupElement(coords);
        self.check(&g)?;
        Ok(g)
    }

    pub fn check(&self, a: &GroupElement) -> Result<()> {
        if a.0.len() != self.dim() {
            return invalid(format!(
                "element has {} coordinates, group dimension is {}",
                a.0.len(),
                self.dim()
            ));
        }
        if a.0.iter().any(|v| !v.is_finite()) {
            return invalid("element has non-finite coordinates");
        }
        Ok(())
    }

    pub fn compose(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        self.check(a)?;
        self.check(b)?;
        Ok(GroupElement(self.compose_raw(&a.0, &b.0)))
    }

    pub(crate) fn compose_raw(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        match *self {
            GroupDescriptor::Euclidean { .. } => a.iter().zip(b).map(|(x, y)| x + y).collect(),
            GroupDescriptor::Heisenberg { n } => {
                let (xa, ya) = (&a[1..=n], &a[n + 1..]);
                let (xb, yb) = (&b[1..=n], &b[n + 1..]);
                let symplectic: f64 = (0..n).map(|i| xa[i] * yb[i] - xb[i] * ya[i]).sum();
                let mut out = Vec::with_capacity(a.len());
                out.push(a[0] + b[0] + 0.5 * symplectic);
                out.extend(a[1..].iter().zip(&b[1..]).map(|(x, y)| x + y));
                out
            }
        }
    }

    /// In exponential coordinates both groups have `a⁻¹ = −a`.
    pub fn inverse(&self, a: &GroupElement) -> Result<GroupElement> {
        self.check(a)?;
        Ok(GroupElement(a.0.iter().map(|v| -v).collect()))
    }

    pub fn dilate(&self, t: f64, a: &GroupElement) -> Result<GroupElement> {
        check_scale(t)?;
        self.check(a)?;
        Ok(GroupElement(self.dilate_raw(t, &a.0)))
    }

    pub(crate) fn dilate_raw(&self, t: f64, a: &[f64]) -> Vec<f64> {
        self.coordinate_degrees()
            .iter()
            .zip(a)
            .map(|(&d, v)| t.powi(d) * v)
            .collect()
    }

    /// `(t,g)·(t',g') = (tt', g·τ_t(g'))`.
    pub fn scaled_compose(&self, p: &ScaledElement, q: &ScaledElement) -> Result<ScaledElement> {
        self.check(&p.g)?;
        self.check(&q.g)?;
        let moved = self.dilate_raw(p.t, &q.g.0);
        ScaledElement::new(p.t * q.t, GroupElement(self.compose_raw(&p.g.0, &moved)))
    }

    /// `(t,g)⁻¹ = (1/t, τ_{1/t}(g⁻¹))`.
    pub fn scaled_inverse(&self, p: &ScaledElement) -> Result<ScaledElement> {
        self.check(&p.g)?;
        let inv: Vec<f64> = p.g.0.iter().map(|v| -v).collect();
        ScaledElement::new(1.0 / p.t, GroupElement(self.dilate_raw(1.0 / p.t, &inv)))
    }

    pub fn scaled_identity(&self) -> ScaledElement {
        ScaledElement {
            t: 1.0,
            g: self.identity(),
        }
    }

    /// Left action of `(t,g)` on a point of `G`: `x ↦ g·τ_t(x)`.
    pub(crate) fn act_point_raw(&self, s: &ScaledElement, x: &[f64]) -> Vec<f64> {
        self.compose_raw(&s.g.0, &self.dilate_raw(s.t, x))
    }

    /// Pull-back of a point under the left action: `x ↦ τ_{1/t}(g⁻¹·x)`.
    pub(crate) fn pull_back_raw(&self, s: &ScaledElement, x: &[f64]) -> Vec<f64> {
        let ginv: Vec<f64> = s.g.0.iter().map(|v| -v).collect();
        self.dilate_raw(1.0 / s.t, &self.compose_raw(&ginv, x))
    }
}

fn check_scale(t: f64) -> Result<()> {
    if !(t.is_finite() && t > 0.0) {
        return invalid(format!("dilation scale must be positive, got {t}"));
    }
    Ok(())
}

/// A point of `G` in exponential coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupElement(pub Vec<f64>);

impl GroupElement {
    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn max_abs_diff(&self, other: &GroupElement) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl From<Vec<f64>> for GroupElement {
    fn from(v: Vec<f64>) -> Self {
        GroupElement(v)
    }
}

/// An element `(t, g)` of `G ⋊ ℝ₊`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledElement {
    pub t: f64,
    pub g: GroupElement,
}

impl ScaledElement {
    pub fn new(t: f64, g: GroupElement) -> Result<Self> {
        check_scale(t)?;
        Ok(ScaledElement { t, g })
    }

    /// Pure translation `(1, g)`.
    pub fn shift(g: GroupElement) -> Self {
        ScaledElement { t: 1.0, g }
    }

    pub fn max_abs_diff(&self, other: &ScaledElement) -> f64 {
        (self.t - other.t).abs().max(self.g.max_abs_diff(&other.g))
    }
}
