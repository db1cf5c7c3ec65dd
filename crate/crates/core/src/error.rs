//! Crate-wide error type.

use thiserror::Error;

/// Convenience alias used by every fallible operation in this crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    /// Some pixels are crossed by no ray, so the projector has empty
    /// columns and the adjoint cannot see those pixels. Carries the
    /// offending `(ix, iy)` pixel indices.
    #[error("{} pixels are crossed by no ray (first offenders: {:?})",
            .pixels.len(),
            &.pixels[..usize::min(8, .pixels.len())])]
    GeometryUncovered { pixels: Vec<(usize, usize)> },

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    /// The pose places the shape support on no pixel center.
    #[error("rasterization produced an empty support for the given pose")]
    EmptyRaster,

    #[error("dictionary has no columns (every pose rasterized empty or off-grid)")]
    EmptyDictionary,

    #[error("shape budget K={k} is infeasible for coefficient dimension p={p}")]
    InfeasibleBudget { k: f64, p: usize },

    #[error("could not place {k} pairwise-disjoint shapes after {attempts} attempts")]
    PlacementInfeasible { k: usize, attempts: usize },

    /// The primal–dual iteration produced a NaN or infinite entry. The
    /// residual trace up to the failing iteration is preserved for
    /// diagnostics.
    #[error("non-finite iterate at iteration {iteration}")]
    NonFiniteIterate { iteration: usize, trace: Vec<f64> },

    #[error("non-finite input: {0}")]
    NonFiniteInput(&'static str),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
