//! Parametric shapes, rigid poses, and rasterization on a pixel grid.
//!
//! A shape is described by an intensity function `u(r)` in its own
//! (untransformed) frame, centered at the origin. A pose `(θ, s)` places
//! it in the image by composing the argument: pixel `j` with center `c_j`
//! receives the value `u(R(θ) c_j + s)` where
//! `R(θ) = [[cos θ, −sin θ], [sin θ, cos θ]]`. The rotation is applied to
//! the argument *before* the shift; [`Pose::centered`] converts the more
//! intuitive "rotate by θ about the shape center placed at `c*`" into this
//! convention via `s = −R(θ) c*`.

use serde::{Deserialize, Serialize};

use crate::dictionary::SparseColumn;
use crate::error::{Error, Result};
use crate::grid::ImageGrid;

/// Parametric shape families. All lengths in meters, all supports bounded,
/// and every family is centrally symmetric about its own origin, so poses
/// rotated by π rasterize identically.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShapeSpec {
    /// Filled disc of constant intensity.
    Disc { radius: f64, intensity: f64 },
    /// Filled axis-aligned ellipse (before posing) of constant intensity.
    Ellipse {
        semi_axis_a: f64,
        semi_axis_b: f64,
        intensity: f64,
    },
    /// Concentric annuli: `radii` strictly increasing, `intensities[k]`
    /// applies on the annulus `(radii[k-1], radii[k]]` (disc `[0, radii[0]]`
    /// for `k = 0`). Models radially varying, non-homogeneous objects.
    RadialDisc {
        radii: Vec<f64>,
        intensities: Vec<f64>,
    },
    /// Elliptical ring: inside the outer ellipse, strictly outside the
    /// inner one. Non-convex with a hole.
    EllipsoidalShell {
        outer_a: f64,
        outer_b: f64,
        inner_a: f64,
        inner_b: f64,
        intensity: f64,
    },
}

impl ShapeSpec {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v > 0.0 && v.is_finite();
        match self {
            ShapeSpec::Disc { radius, intensity } => {
                if !pos(*radius) {
                    return Err(Error::InvalidShape(format!("disc radius {radius}")));
                }
                if !intensity.is_finite() || *intensity <= 0.0 {
                    return Err(Error::InvalidShape(format!("disc intensity {intensity}")));
                }
            }
            ShapeSpec::Ellipse {
                semi_axis_a,
                semi_axis_b,
                intensity,
            } => {
                if !pos(*semi_axis_a) || !pos(*semi_axis_b) {
                    return Err(Error::InvalidShape(format!(
                        "ellipse semi-axes ({semi_axis_a}, {semi_axis_b})"
                    )));
                }
                if !intensity.is_finite() || *intensity <= 0.0 {
                    return Err(Error::InvalidShape(format!(
                        "ellipse intensity {intensity}"
                    )));
                }
            }
            ShapeSpec::RadialDisc { radii, intensities } => {
                if radii.is_empty() || radii.len() != intensities.len() {
                    return Err(Error::InvalidShape(format!(
                        "radial disc needs matching nonempty radii/intensities, got {}/{}",
                        radii.len(),
                        intensities.len()
                    )));
                }
                let mut prev = 0.0;
                for &r in radii {
                    if !pos(r) || r <= prev {
                        return Err(Error::InvalidShape(
                            "radial disc radii must be strictly increasing and positive".into(),
                        ));
                    }
                    prev = r;
                }
                if intensities.iter().any(|w| !w.is_finite() || *w <= 0.0) {
                    return Err(Error::InvalidShape(
                        "radial disc intensities must be positive and finite".into(),
                    ));
                }
            }
            ShapeSpec::EllipsoidalShell {
                outer_a,
                outer_b,
                inner_a,
                inner_b,
                intensity,
            } => {
                if !pos(*outer_a) || !pos(*outer_b) || !pos(*inner_a) || !pos(*inner_b) {
                    return Err(Error::InvalidShape("shell semi-axes must be positive".into()));
                }
                if inner_a >= outer_a || inner_b >= outer_b {
                    return Err(Error::InvalidShape(format!(
                        "shell inner ellipse ({inner_a}, {inner_b}) must be strictly inside \
                         the outer one ({outer_a}, {outer_b})"
                    )));
                }
                if !intensity.is_finite() || *intensity <= 0.0 {
                    return Err(Error::InvalidShape(format!("shell intensity {intensity}")));
                }
            }
        }
        Ok(())
    }

    /// Radius of the smallest origin-centered disc containing the support.
    pub fn bounding_radius(&self) -> f64 {
        match self {
            ShapeSpec::Disc { radius, .. } => *radius,
            ShapeSpec::Ellipse {
                semi_axis_a,
                semi_axis_b,
                ..
            } => semi_axis_a.max(*semi_axis_b),
            ShapeSpec::RadialDisc { radii, .. } => *radii.last().unwrap(),
            ShapeSpec::EllipsoidalShell {
                outer_a, outer_b, ..
            } => outer_a.max(*outer_b),
        }
    }

    /// Intensity at a point of the shape's own frame (0 outside the
    /// support). Boundaries are inclusive for outer surfaces; the shell
    /// hole is closed (points on the inner ellipse are excluded).
    pub fn value_at(&self, p: [f64; 2]) -> f64 {
        let r2 = p[0] * p[0] + p[1] * p[1];
        match self {
            ShapeSpec::Disc { radius, intensity } => {
                if r2 <= radius * radius {
                    *intensity
                } else {
                    0.0
                }
            }
            ShapeSpec::Ellipse {
                semi_axis_a,
                semi_axis_b,
                intensity,
            } => {
                let q = (p[0] / semi_axis_a).powi(2) + (p[1] / semi_axis_b).powi(2);
                if q <= 1.0 {
                    *intensity
                } else {
                    0.0
                }
            }
            ShapeSpec::RadialDisc { radii, intensities } => {
                for (r, w) in radii.iter().zip(intensities) {
                    if r2 <= r * r {
                        return *w;
                    }
                }
                0.0
            }
            ShapeSpec::EllipsoidalShell {
                outer_a,
                outer_b,
                inner_a,
                inner_b,
                intensity,
            } => {
                let qo = (p[0] / outer_a).powi(2) + (p[1] / outer_b).powi(2);
                let qi = (p[0] / inner_a).powi(2) + (p[1] / inner_b).powi(2);
                if qo <= 1.0 && qi > 1.0 {
                    *intensity
                } else {
                    0.0
                }
            }
        }
    }
}

/// Rigid pose `(θ, s)`: the posed shape evaluates to `u(R(θ) c + s)` at
/// image point `c`. Angles are normalized into `[0, 2π)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub angle: f64,
    pub shift: [f64; 2],
}

impl Pose {
    pub fn new(angle: f64, shift: [f64; 2]) -> Self {
        Self {
            angle: angle.rem_euclid(std::f64::consts::TAU),
            shift,
        }
    }

    /// Pose whose shape center lands on the image point `center`, rotated
    /// by `angle` about that center: `s = −R(θ)·center`.
    pub fn centered(angle: f64, center: [f64; 2]) -> Self {
        let (sin, cos) = angle.sin_cos();
        Self::new(
            angle,
            [
                -(cos * center[0] - sin * center[1]),
                -(sin * center[0] + cos * center[1]),
            ],
        )
    }

    /// Image-space location of the shape center, `−R(θ)ᵀ s`.
    pub fn center(&self) -> [f64; 2] {
        let (sin, cos) = self.angle.sin_cos();
        [
            -(cos * self.shift[0] + sin * self.shift[1]),
            -(-sin * self.shift[0] + cos * self.shift[1]),
        ]
    }

    /// Map an image point into the shape frame: `R(θ) c + s`.
    pub fn to_shape_frame(&self, c: [f64; 2]) -> [f64; 2] {
        let (sin, cos) = self.angle.sin_cos();
        [
            cos * c[0] - sin * c[1] + self.shift[0],
            sin * c[0] + cos * c[1] + self.shift[1],
        ]
    }
}

/// Rasterize a posed shape by pixel-center membership: pixel `j` receives
/// `u(R(θ) c_j + s)`. Returns the sparse column of nonzero pixels, sorted
/// by linear index, or [`Error::EmptyRaster`] when no pixel center falls
/// in the support.
pub fn rasterize(shape: &ShapeSpec, pose: &Pose, grid: &ImageGrid) -> Result<SparseColumn> {
    shape.validate()?;
    let rho = shape.bounding_radius();
    let c0 = pose.center();

    // The support lives in the disc of radius rho about c0; scan only the
    // pixel bounding box of that disc (plus one pixel of slack).
    let clamp_x = |v: f64| (v.floor() as isize).clamp(0, grid.n_x() as isize - 1) as usize;
    let clamp_y = |v: f64| (v.floor() as isize).clamp(0, grid.n_y() as isize - 1) as usize;
    let ix_lo = clamp_x((c0[0] - rho - grid.x_min()) / grid.dx() - 1.0);
    let ix_hi = clamp_x((c0[0] + rho - grid.x_min()) / grid.dx() + 1.0);
    let iy_lo = clamp_y((c0[1] - rho - grid.y_min()) / grid.dy() - 1.0);
    let iy_hi = clamp_y((c0[1] + rho - grid.y_min()) / grid.dy() + 1.0);

    let mut indices = Vec::new();
    let mut values = Vec::new();
    for iy in iy_lo..=iy_hi {
        for ix in ix_lo..=ix_hi {
            let v = shape.value_at(pose.to_shape_frame(grid.center(ix, iy)));
            if v != 0.0 {
                indices.push(grid.linear(ix, iy));
                values.push(v);
            }
        }
    }
    if indices.is_empty() {
        return Err(Error::EmptyRaster);
    }
    Ok(SparseColumn { indices, values })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid64() -> ImageGrid {
        ImageGrid::new(1.0, 1.0, 64, 64).unwrap()
    }

    #[test]
    fn disc_raster_value_and_support_size() {
        let g = grid64();
        let shape = ShapeSpec::Disc {
            radius: 0.1,
            intensity: 2.5,
        };
        // Center the disc on an actual pixel center so the raster is
        // symmetric.
        let c = g.center(32, 32);
        let col = rasterize(&shape, &Pose::centered(0.0, c), &g).unwrap();
        assert!(col.values.iter().all(|&v| v == 2.5));
        // Area heuristic: support count ~ pi r^2 / pixel area.
        let expected = std::f64::consts::PI * 0.1 * 0.1 / (g.dx() * g.dy());
        let got = col.indices.len() as f64;
        assert!(
            (got - expected).abs() < 0.15 * expected,
            "support {got} vs {expected}"
        );
    }

    #[test]
    fn disc_rotation_leaves_raster_unchanged() {
        let g = grid64();
        let shape = ShapeSpec::Disc {
            radius: 0.08,
            intensity: 1.0,
        };
        let c = [0.1015625, -0.203125]; // pixel-center aligned
        let base = rasterize(&shape, &Pose::centered(0.0, c), &g).unwrap();
        for &angle in &[0.3, 1.2, 2.9] {
            let rot = rasterize(&shape, &Pose::centered(angle, c), &g).unwrap();
            assert_eq!(base.indices, rot.indices);
        }
    }

    #[test]
    fn ellipse_quarter_turn_equals_swapped_axes() {
        let g = grid64();
        let e1 = ShapeSpec::Ellipse {
            semi_axis_a: 0.2,
            semi_axis_b: 0.08,
            intensity: 1.0,
        };
        let e2 = ShapeSpec::Ellipse {
            semi_axis_a: 0.08,
            semi_axis_b: 0.2,
            intensity: 1.0,
        };
        let a = rasterize(&e1, &Pose::centered(std::f64::consts::FRAC_PI_2, [0.0; 2]), &g)
            .unwrap();
        let b = rasterize(&e2, &Pose::centered(0.0, [0.0; 2]), &g).unwrap();
        assert_eq!(a.indices, b.indices);
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn radial_disc_intensities_decrease_with_radius() {
        let g = grid64();
        let shape = ShapeSpec::RadialDisc {
            radii: vec![0.03, 0.06, 0.09],
            intensities: vec![1.0, 0.6, 0.3],
        };
        let c = g.center(32, 32);
        let col = rasterize(&shape, &Pose::centered(0.0, c), &g).unwrap();
        for (&j, &v) in col.indices.iter().zip(&col.values) {
            let (ix, iy) = g.coords(j);
            let pc = g.center(ix, iy);
            let d = ((pc[0] - c[0]).powi(2) + (pc[1] - c[1]).powi(2)).sqrt();
            let expected = if d <= 0.03 {
                1.0
            } else if d <= 0.06 {
                0.6
            } else {
                0.3
            };
            assert_eq!(v, expected, "at distance {d}");
        }
    }

    #[test]
    fn shell_has_a_hole() {
        let g = grid64();
        let shape = ShapeSpec::EllipsoidalShell {
            outer_a: 0.2,
            outer_b: 0.1,
            inner_a: 0.15,
            inner_b: 0.06,
            intensity: 1.0,
        };
        let c = g.center(32, 32);
        let col = rasterize(&shape, &Pose::centered(0.0, c), &g).unwrap();
        // The shape center itself is inside the hole.
        assert!(!col.indices.contains(&g.linear(32, 32)));
        assert!(!col.indices.is_empty());
    }

    #[test]
    fn off_grid_pose_rasterizes_empty() {
        let g = grid64();
        let shape = ShapeSpec::Disc {
            radius: 0.05,
            intensity: 1.0,
        };
        let err = rasterize(&shape, &Pose::centered(0.0, [5.0, 5.0]), &g).unwrap_err();
        assert!(matches!(err, Error::EmptyRaster));
    }

    #[test]
    fn shape_validation_rejects_bad_parameters() {
        assert!(ShapeSpec::Disc {
            radius: -0.1,
            intensity: 1.0
        }
        .validate()
        .is_err());
        assert!(ShapeSpec::RadialDisc {
            radii: vec![0.2, 0.1],
            intensities: vec![1.0, 1.0]
        }
        .validate()
        .is_err());
        assert!(ShapeSpec::RadialDisc {
            radii: vec![0.1],
            intensities: vec![]
        }
        .validate()
        .is_err());
        assert!(ShapeSpec::EllipsoidalShell {
            outer_a: 0.1,
            outer_b: 0.1,
            inner_a: 0.2,
            inner_b: 0.05,
            intensity: 1.0
        }
        .validate()
        .is_err());
    }

    #[test]
    fn pose_angles_normalize_into_two_pi() {
        let p = Pose::new(-std::f64::consts::PI, [0.0, 0.0]);
        assert!((p.angle - std::f64::consts::PI).abs() < 1e-12);
        let q = Pose::new(7.0, [0.0, 0.0]);
        assert!(q.angle >= 0.0 && q.angle < std::f64::consts::TAU);
    }

    #[test]
    fn pose_centered_round_trips_center() {
        let c = [0.21, -0.4];
        for &a in &[0.0, 0.7, 2.1, 4.4] {
            let p = Pose::centered(a, c);
            let back = p.center();
            assert!((back[0] - c[0]).abs() < 1e-12);
            assert!((back[1] - c[1]).abs() < 1e-12);
        }
    }
}
