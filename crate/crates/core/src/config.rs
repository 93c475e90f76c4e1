//! Experiment configuration files (JSON) and the objects they describe.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::function_space::{make_grid, GridSpec, PairingKind, SampledFunction};
use crate::group::{GroupDescriptor, GroupElement};
use crate::operator::{
    group_convolution, hilbert_transform, multiplication_operator, shift_operator, OperatorMatrix,
    WindowSpec,
};
use crate::synthesis::Embedding;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub group: GroupDescriptor,
    pub grid: GridConfig,
    pub window: WindowConfig,
    #[serde(default = "default_p")]
    pub p: f64,
    pub t_levels: Vec<f64>,
    pub lattice: LatticeConfig,
    #[serde(default)]
    pub operators: BTreeMap<String, OperatorSpec>,
    pub experiment: ExperimentKind,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub rank: usize,
    #[serde(default)]
    pub seed: u64,
    pub output: PathBuf,
}

fn default_p() -> f64 {
    2.0
}

fn default_tolerance() -> f64 {
    1e-3
}

/// Either `h` with half-width `R`, or `h` with `points_per_axis` for the
/// homogeneous grid (centre spacing `h²/2` on the Heisenberg group).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub h: f64,
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points_per_axis: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum LatticeConfig {
    /// `min, min + step, …, ≤ max` in every coordinate.
    Range { min: f64, max: f64, step: f64 },
    /// Explicit points.
    Points { points: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FunctionName {
    Sin,
    Cos,
    Gaussian,
    Linear,
    One,
}

impl FunctionName {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            FunctionName::Sin => x.sin(),
            FunctionName::Cos => x.cos(),
            FunctionName::Gaussian => (-x * x).exp(),
            FunctionName::Linear => x,
            FunctionName::One => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum OperatorSpec {
    Identity,
    Zero,
    /// Multiplication by `function(x_c)` of coordinate `c`.
    Multiplication {
        function: FunctionName,
        #[serde(default)]
        coordinate: usize,
    },
    /// Convolution with the Gaussian `exp(−|x|²/width²)`.
    Convolution { width: f64 },
    Hilbert,
    Shift { by: Vec<f64> },
    Scaled { factor: f64, of: Box<OperatorSpec> },
    Sum { terms: Vec<OperatorSpec> },
}

impl OperatorSpec {
    pub fn build(&self, grid: &GridSpec, p: f64) -> Result<OperatorMatrix> {
        match self {
            OperatorSpec::Identity => Ok(OperatorMatrix::identity(grid)),
            OperatorSpec::Zero => Ok(OperatorMatrix::zeros(grid)),
            OperatorSpec::Multiplication { function, coordinate } => {
                if *coordinate >= grid.dim() {
                    return invalid(format!("coordinate {coordinate} out of range"));
                }
                let f = SampledFunction::from_fn(grid, p, |x| function.eval(x[*coordinate]));
                Ok(multiplication_operator(&f))
            }
            OperatorSpec::Convolution { width } => {
                if !(*width > 0.0) {
                    return invalid("convolution width must be positive");
                }
                let k = SampledFunction::from_fn(grid, p, |x| {
                    (-x.iter().map(|v| v * v).sum::<f64>() / (width * width)).exp()
                });
                group_convolution(&k)
            }
            OperatorSpec::Hilbert => hilbert_transform(grid),
            OperatorSpec::Shift { by } => shift_operator(grid, &grid.group.element(by.clone())?),
            OperatorSpec::Scaled { factor, of } => Ok(of.build(grid, p)?.scaled(*factor)),
            OperatorSpec::Sum { terms } => {
                let mut acc = OperatorMatrix::zeros(grid);
                for t in terms {
                    acc = acc.add(&t.build(grid, p)?)?;
                }
                Ok(acc)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnvelopeRule {
    /// `A_x = A(x,x)·I`, the diagonal entry at the anchor.
    Frozen,
    /// `A_x = A`.
    Constant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ExperimentKind {
    SymbolField {
        operator: String,
    },
    LocalEquiv {
        a: String,
        b: String,
        point: Vec<f64>,
        #[serde(default = "yes")]
        expect: bool,
    },
    Envelope {
        operator: String,
        rule: EnvelopeRule,
        lo: Vec<f64>,
        hi: Vec<f64>,
        depths: Vec<u32>,
        /// Accepted range for the ratio of successive errors.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect_ratio: Option<[f64; 2]>,
    },
    Invariance {
        operator: String,
        t_samples: Vec<f64>,
        shifts: Vec<Vec<f64>>,
        /// Interior half-width on which commutators are measured.
        interior: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect: Option<bool>,
    },
    LocalType {
        operator: String,
        separation: f64,
        #[serde(default = "default_trials")]
        trials: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expect: Option<bool>,
    },
    SingularValues {
        operator: String,
    },
    Reconstruction {
        operator: String,
        embedding: Embedding,
        #[serde(default = "default_pairing")]
        pairing: PairingKind,
        #[serde(default)]
        extrapolate: bool,
    },
    Verify {
        suite: String,
    },
}

fn yes() -> bool {
    true
}

fn default_trials() -> usize {
    32
}

fn default_pairing() -> PairingKind {
    PairingKind::Hardy
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    fn validate(&self) -> Result<()> {
        self.group.validate()?;
        let names: Vec<&String> = match &self.experiment {
            ExperimentKind::SymbolField { operator }
            | ExperimentKind::Envelope { operator, .. }
            | ExperimentKind::Invariance { operator, .. }
            | ExperimentKind::LocalType { operator, .. }
            | ExperimentKind::SingularValues { operator }
            | ExperimentKind::Reconstruction { operator, .. } => vec![operator],
            ExperimentKind::LocalEquiv { a, b, .. } => vec![a, b],
            ExperimentKind::Verify { .. } => vec![],
        };
        for name in names {
            if !self.operators.contains_key(name) {
                return invalid(format!("operators: no operator named \"{name}\""));
            }
        }
        Ok(())
    }

    pub fn build_grid(&self) -> Result<GridSpec> {
        match (self.grid.r, self.grid.points_per_axis) {
            (Some(r), None) => make_grid(self.group, self.grid.h, r),
            (None, Some(n)) => GridSpec::homogeneous(self.group, self.grid.h, n),
            _ => invalid("grid: give exactly one of \"R\" and \"points_per_axis\""),
        }
    }

    pub fn build_window(&self, grid: &GridSpec) -> Result<WindowSpec> {
        WindowSpec::homogeneous_box(grid, self.window.radius)
    }

    pub fn build_lattice(&self, grid: &GridSpec) -> Result<Vec<GroupElement>> {
        let points: Vec<Vec<f64>> = match &self.lattice {
            LatticeConfig::Points { points } => points.clone(),
            LatticeConfig::Range { min, max, step } => {
                if !(*step > 0.0) || max < min {
                    return invalid("lattice: need step > 0 and min ≤ max");
                }
                let count = ((max - min) / step + 1e-9).floor() as usize + 1;
                let axis: Vec<f64> = (0..count).map(|k| min + k as f64 * step).collect();
                let mut pts = vec![Vec::new()];
                for _ in 0..grid.dim() {
                    pts = pts
                        .into_iter()
                        .flat_map(|p| {
                            axis.iter().map(move |&v| {
                                let mut q = p.clone();
                                q.push(v);
                                q
                            })
                        })
                        .collect();
                }
                pts
            }
        };
        points
            .into_iter()
            .map(|p| {
                let g = grid.group.element(p)?;
                if !grid.on_lattice(&g.0) {
                    return Err(Error::InvalidArgument(format!(
                        "lattice: {:?} is not a grid point",
                        g.0
                    )));
                }
                Ok(g)
            })
            .collect()
    }

    pub fn operator(&self, name: &str, grid: &GridSpec) -> Result<OperatorMatrix> {
        self.operators
            .get(name)
            .ok_or_else(|| Error::InvalidArgument(format!("operators: no operator named \"{name}\"")))?
            .build(grid, self.p)
    }
}
