//! Pixel grid over a centered rectangular image domain.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform pixel grid on the axis-aligned domain
/// `[-extent_x/2, extent_x/2] × [-extent_y/2, extent_y/2]` (meters).
///
/// Pixel `(0, 0)` sits at the lower-left corner; `ix` grows to the right,
/// `iy` grows upward. The linear index of pixel `(ix, iy)` is
/// `iy * n_x + ix`, i.e. images are stored row-major with `y` as the slow
/// axis. All physical lengths are in meters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageGrid {
    extent_x: f64,
    extent_y: f64,
    n_x: usize,
    n_y: usize,
}

impl ImageGrid {
    pub fn new(extent_x: f64, extent_y: f64, n_x: usize, n_y: usize) -> Result<Self> {
        if !(extent_x > 0.0 && extent_x.is_finite() && extent_y > 0.0 && extent_y.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "extents must be positive and finite, got {extent_x} m x {extent_y} m"
            )));
        }
        if n_x == 0 || n_y == 0 {
            return Err(Error::InvalidGrid(format!(
                "pixel counts must be positive, got {n_x} x {n_y}"
            )));
        }
        Ok(Self {
            extent_x,
            extent_y,
            n_x,
            n_y,
        })
    }

    pub fn extent_x(&self) -> f64 {
        self.extent_x
    }

    pub fn extent_y(&self) -> f64 {
        self.extent_y
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn n_y(&self) -> usize {
        self.n_y
    }

    /// Total pixel count `n = n_x * n_y`.
    pub fn n(&self) -> usize {
        self.n_x * self.n_y
    }

    /// Pixel width.
    pub fn dx(&self) -> f64 {
        self.extent_x / self.n_x as f64
    }

    /// Pixel height.
    pub fn dy(&self) -> f64 {
        self.extent_y / self.n_y as f64
    }

    pub fn x_min(&self) -> f64 {
        -0.5 * self.extent_x
    }

    pub fn x_max(&self) -> f64 {
        0.5 * self.extent_x
    }

    pub fn y_min(&self) -> f64 {
        -0.5 * self.extent_y
    }

    pub fn y_max(&self) -> f64 {
        0.5 * self.extent_y
    }

    /// Center of pixel `(ix, iy)`.
    pub fn center(&self, ix: usize, iy: usize) -> [f64; 2] {
        debug_assert!(ix < self.n_x && iy < self.n_y);
        [
            self.x_min() + (ix as f64 + 0.5) * self.dx(),
            self.y_min() + (iy as f64 + 0.5) * self.dy(),
        ]
    }

    /// Linear index of pixel `(ix, iy)`.
    pub fn linear(&self, ix: usize, iy: usize) -> usize {
        debug_assert!(ix < self.n_x && iy < self.n_y);
        iy * self.n_x + ix
    }

    /// Inverse of [`ImageGrid::linear`].
    pub fn coords(&self, j: usize) -> (usize, usize) {
        debug_assert!(j < self.n());
        (j % self.n_x, j / self.n_x)
    }

    /// True when the point lies inside the closed image domain.
    pub fn contains(&self, p: [f64; 2]) -> bool {
        p[0] >= self.x_min() && p[0] <= self.x_max() && p[1] >= self.y_min() && p[1] <= self.y_max()
    }
}
