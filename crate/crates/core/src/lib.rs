//! Single-shot tomographic shape sensing.
//!
//! A single fan-beam projection `y = A x` is acquired from an unknown image
//! `x` that is promised to be a superposition of `K` rigid shapes drawn from
//! a known dictionary `Ψ` (one column per shape/rotation/shift pose, `x = Ψ z`
//! with binary `z`). Recovery runs in three stages:
//!
//! 1. [`projector`] builds the sparse fan-beam operator `A` on an
//!    [`grid::ImageGrid`] with exact ray–pixel intersection lengths.
//! 2. [`solver`] solves the convex relaxation
//!    `min ‖AΨz − y‖ s.t. zᵀ1 = K, 0 ≤ z ≤ 1` (or the `ℓ1`-ball baseline
//!    `‖z‖₁ ≤ K`) with a primal–dual iteration built from [`prox`] operators.
//! 3. [`former`] snaps the relaxed coefficients back to `K` binary,
//!    pairwise-disjoint dictionary columns by a greedy residual-checked scan.
//!
//! [`harness`] wires these stages into seeded, config-driven experiments
//! (success-rate sweeps, a mixed-shape reference case, noise studies) with
//! deterministic CSV/PGM/JSON artifacts; the `cosharp` binary is a thin CLI
//! over it.

pub mod dictionary;
pub mod error;
pub mod former;
pub mod grid;
pub mod harness;
pub mod io;
pub mod opnorm;
pub mod phantom;
pub mod projector;
pub mod prox;
pub mod shapes;
pub mod solver;
pub mod vecmath;

pub use dictionary::{build_dictionary, ColumnMeta, Dictionary, SparseColumn, TranslationLattice};
pub use error::{Error, Result};
pub use former::{form_image, FormationResult};
pub use grid::ImageGrid;
pub use opnorm::{operator_norm, LinearOperator, OperatorNorm};
pub use phantom::{
    phantom_from_columns, random_phantom, random_phantom_one_per_shape, Phantom,
};
pub use projector::{build_fan_projector, FanBeamGeometry, SparseProjector};
pub use prox::{project_ksimplex, project_l1_ball, prox_conj_misfit};
pub use shapes::{rasterize, Pose, ShapeSpec};
pub use solver::{
    solve, solve_projected, ConstraintMode, ProjectedDictionary, SolverConfig, SolverResult,
    Termination,
};

/// Spatial dimension of every geometric type in this crate. The ray
/// tracer, shape membership tests, and pose algebra are written for the
/// planar case only.
pub const DIMENSION: usize = 2;
