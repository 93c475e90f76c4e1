//! Operator localization over dilation semidirect products `G ⋊ ℝ₊` of
//! nilpotent groups (Euclidean `ℝⁿ` and Heisenberg `ℍⁿ`).
//!
//! The crate discretizes `L^p(G)` on uniform grids, realizes the
//! representation `π(t,g)` and its action on operators, and builds the
//! operator-valued symbols `S_A(t,g) = P_e π((t,g)⁻¹) A π(t,g) P_e` used to
//! test local type and local equivalence. The synthesis side rebuilds
//! operators from local data with envelope sums and the inverse covariant
//! transform.

pub mod config;
pub mod error;
pub mod function_space;
pub mod group;
pub mod io;
pub mod localization;
pub mod operator;
pub mod representation;
pub mod run;
pub mod synthesis;
pub mod verify;

pub use error::{Error, Result};
pub use function_space::{
    make_grid, pairing, project_region, GridSpec, PairingKind, RegionMask, SampledFunction,
};
pub use group::{GroupDescriptor, GroupElement, ScaledElement};
pub use operator::{OperatorMatrix, WindowSpec};
pub use representation::{act, act_matrix, double_act, RepMode, RepParams};
