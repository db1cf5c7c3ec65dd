//! Fan-beam acquisition geometry and the sparse projection operator.
//!
//! One stationary source emits a fan of rays, one per detector cell. Entry
//! `a[i][j]` of the operator is the exact Euclidean length (meters) of the
//! intersection of ray `i` with pixel `j`, computed by walking the sorted
//! grid-line crossings of the ray (a Siddon-style traversal). The row sum
//! of `A` therefore equals the chord length of the ray through the image
//! domain, which the tests check against an independent line–rectangle
//! clipper.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::ImageGrid;
use crate::opnorm::LinearOperator;

/// Intersection segments shorter than this (meters) are dropped at
/// assembly time; they arise only from rays grazing pixel corners and
/// carry no information, but would otherwise litter the sparsity pattern.
pub const MIN_WEIGHT: f64 = 1e-12;

/// Single-source fan-beam geometry: a point source and a straight detector
/// array of equally spaced cells. Lengths in meters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FanBeamGeometry {
    source: [f64; 2],
    detector_center: [f64; 2],
    detector_dir: [f64; 2],
    detector_length: f64,
    detector_count: usize,
}

impl FanBeamGeometry {
    /// `detector_dir` need not be normalized; it is scaled to unit length.
    pub fn new(
        source: [f64; 2],
        detector_center: [f64; 2],
        detector_dir: [f64; 2],
        detector_length: f64,
        detector_count: usize,
    ) -> Result<Self> {
        if !(source[0].is_finite()
            && source[1].is_finite()
            && detector_center[0].is_finite()
            && detector_center[1].is_finite())
        {
            return Err(Error::InvalidGeometry(
                "source and detector center must be finite".into(),
            ));
        }
        let len = (detector_dir[0] * detector_dir[0] + detector_dir[1] * detector_dir[1]).sqrt();
        if !(len > 0.0 && len.is_finite()) {
            return Err(Error::InvalidGeometry(
                "detector direction must be a nonzero finite vector".into(),
            ));
        }
        if !(detector_length > 0.0 && detector_length.is_finite()) {
            return Err(Error::InvalidGeometry(format!(
                "detector length must be positive, got {detector_length}"
            )));
        }
        if detector_count == 0 {
            return Err(Error::InvalidGeometry("detector count must be >= 1".into()));
        }
        Ok(Self {
            source,
            detector_center,
            detector_dir: [detector_dir[0] / len, detector_dir[1] / len],
            detector_length,
            detector_count,
        })
    }

    pub fn source(&self) -> [f64; 2] {
        self.source
    }

    pub fn detector_count(&self) -> usize {
        self.detector_count
    }

    pub fn detector_length(&self) -> f64 {
        self.detector_length
    }

    /// Center of detector cell `i`; cells are numbered along
    /// `detector_dir` starting from the `-detector_length/2` end.
    pub fn cell_center(&self, i: usize) -> [f64; 2] {
        debug_assert!(i < self.detector_count);
        let cell = self.detector_length / self.detector_count as f64;
        let offset = -0.5 * self.detector_length + (i as f64 + 0.5) * cell;
        [
            self.detector_center[0] + offset * self.detector_dir[0],
            self.detector_center[1] + offset * self.detector_dir[1],
        ]
    }

    /// Distance from the source to the closest point of the detector
    /// segment.
    fn source_detector_distance(&self) -> f64 {
        let half = 0.5 * self.detector_length;
        let d = self.detector_dir;
        let rel = [
            self.source[0] - self.detector_center[0],
            self.source[1] - self.detector_center[1],
        ];
        let along = (rel[0] * d[0] + rel[1] * d[1]).clamp(-half, half);
        let closest = [
            self.detector_center[0] + along * d[0],
            self.detector_center[1] + along * d[1],
        ];
        ((self.source[0] - closest[0]).powi(2) + (self.source[1] - closest[1]).powi(2)).sqrt()
    }
}

/// Sparse fan-beam projection operator in compressed-row form: one row per
/// detector cell, one column per pixel, all stored weights strictly
/// positive intersection lengths.
#[derive(Clone, Debug)]
pub struct SparseProjector {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    weights: Vec<f64>,
}

impl SparseProjector {
    /// Number of rays (detector cells).
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of pixels.
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.weights.len()
    }

    /// `(pixel, weight)` entries of row `i`, sorted by pixel index.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        self.col_idx[lo..hi]
            .iter()
            .copied()
            .zip(self.weights[lo..hi].iter().copied())
    }

    /// Sum of the weights of row `i` (the chord length of ray `i` through
    /// the image domain).
    pub fn row_sum(&self, i: usize) -> f64 {
        self.row(i).map(|(_, w)| w).sum()
    }

    /// Forward projection `y = A x`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch {
                context: "projector apply",
                expected: self.cols,
                got: x.len(),
            });
        }
        let mut y = vec![0.0; self.rows];
        self.apply_into(x, &mut y);
        Ok(y)
    }

    /// Exact adjoint (back projection) `x = Aᵀ u`.
    pub fn apply_adjoint(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.rows {
            return Err(Error::DimensionMismatch {
                context: "projector adjoint",
                expected: self.rows,
                got: u.len(),
            });
        }
        let mut x = vec![0.0; self.cols];
        self.apply_adjoint_into(u, &mut x);
        Ok(x)
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.rows {
            let mut acc = 0.0;
            for t in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.weights[t] * x[self.col_idx[t]];
            }
            y[i] = acc;
        }
    }

    fn apply_adjoint_into(&self, u: &[f64], x: &mut [f64]) {
        x.fill(0.0);
        for i in 0..self.rows {
            let ui = u[i];
            if ui == 0.0 {
                continue;
            }
            for t in self.row_ptr[i]..self.row_ptr[i + 1] {
                x[self.col_idx[t]] += self.weights[t] * ui;
            }
        }
    }

    /// Compressed-column view `(col_ptr, row_idx, weights)`, used where
    /// column access is needed (projecting single dictionary columns).
    pub(crate) fn to_csc(&self) -> (Vec<usize>, Vec<usize>, Vec<f64>) {
        let mut col_ptr = vec![0usize; self.cols + 1];
        for &j in &self.col_idx {
            col_ptr[j + 1] += 1;
        }
        for j in 0..self.cols {
            col_ptr[j + 1] += col_ptr[j];
        }
        let mut next = col_ptr.clone();
        let mut row_idx = vec![0usize; self.nnz()];
        let mut vals = vec![0.0; self.nnz()];
        for i in 0..self.rows {
            for t in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[t];
                row_idx[next[j]] = i;
                vals[next[j]] = self.weights[t];
                next[j] += 1;
            }
        }
        (col_ptr, row_idx, vals)
    }

    /// Write the operator as text triplets, one `row col weight` line per
    /// stored entry, rows ascending.
    pub fn dump_triplets<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        for i in 0..self.rows {
            for t in self.row_ptr[i]..self.row_ptr[i + 1] {
                writeln!(w, "{} {} {}", i, self.col_idx[t], self.weights[t])?;
            }
        }
        Ok(())
    }
}

impl LinearOperator for SparseProjector {
    fn rows(&self) -> usize {
        self.rows
    }

    fn cols(&self) -> usize {
        self.cols
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        self.apply_into(x, out);
    }

    fn apply_transpose(&self, u: &[f64], out: &mut [f64]) {
        self.apply_adjoint_into(u, out);
    }
}

/// Entry/exit parameters of the half-line `o + t d, t ≥ 0` through the
/// image domain, or `None` when it misses. `d` must be unit length so the
/// parameters are Euclidean distances.
fn clip_ray(grid: &ImageGrid, o: [f64; 2], d: [f64; 2]) -> Option<(f64, f64)> {
    let mut t0 = 0.0f64;
    let mut t1 = f64::INFINITY;
    let bounds = [(grid.x_min(), grid.x_max()), (grid.y_min(), grid.y_max())];
    for axis in 0..2 {
        let (lo, hi) = bounds[axis];
        if d[axis] == 0.0 {
            // Parallel to this axis: on-boundary rays have zero-area
            // overlap with the open pixel interiors, treat as a miss.
            if o[axis] <= lo || o[axis] >= hi {
                return None;
            }
        } else {
            let mut a = (lo - o[axis]) / d[axis];
            let mut b = (hi - o[axis]) / d[axis];
            if a > b {
                std::mem::swap(&mut a, &mut b);
            }
            t0 = t0.max(a);
            t1 = t1.min(b);
        }
    }
    if t1 - t0 > MIN_WEIGHT {
        Some((t0, t1))
    } else {
        None
    }
}

/// Build the sparse fan-beam operator for `grid` under `geom`.
///
/// Preconditions checked here: the source lies strictly outside the image
/// domain and does not sit on the detector segment. Rays that miss the
/// domain produce empty rows (legal); a pixel crossed by no ray makes the
/// acquisition blind to that pixel and fails with
/// [`Error::GeometryUncovered`].
pub fn build_fan_projector(grid: &ImageGrid, geom: &FanBeamGeometry) -> Result<SparseProjector> {
    let s = geom.source();
    if grid.contains(s) {
        return Err(Error::InvalidGeometry(format!(
            "source ({}, {}) must lie strictly outside the image domain",
            s[0], s[1]
        )));
    }
    if geom.source_detector_distance() <= MIN_WEIGHT {
        return Err(Error::InvalidGeometry(
            "source lies on the detector segment".into(),
        ));
    }

    let m = geom.detector_count();
    let n = grid.n();
    let mut row_ptr = Vec::with_capacity(m + 1);
    let mut col_idx = Vec::new();
    let mut weights = Vec::new();
    row_ptr.push(0);

    let mut crossings: Vec<f64> = Vec::with_capacity(grid.n_x() + grid.n_y() + 2);
    let mut covered = vec![false; n];

    for i in 0..m {
        let c = geom.cell_center(i);
        let mut d = [c[0] - s[0], c[1] - s[1]];
        let len = (d[0] * d[0] + d[1] * d[1]).sqrt();
        // source_detector_distance > 0 guarantees len > 0
        d = [d[0] / len, d[1] / len];

        if let Some((t0, t1)) = clip_ray(grid, s, d) {
            crossings.clear();
            crossings.push(t0);
            crossings.push(t1);
            if d[0] != 0.0 {
                for k in 0..=grid.n_x() {
                    let t = (grid.x_min() + k as f64 * grid.dx() - s[0]) / d[0];
                    if t > t0 && t < t1 {
                        crossings.push(t);
                    }
                }
            }
            if d[1] != 0.0 {
                for k in 0..=grid.n_y() {
                    let t = (grid.y_min() + k as f64 * grid.dy() - s[1]) / d[1];
                    if t > t0 && t < t1 {
                        crossings.push(t);
                    }
                }
            }
            crossings.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());

            let start = col_idx.len();
            for w in crossings.windows(2) {
                let seg = w[1] - w[0];
                if seg < MIN_WEIGHT {
                    continue;
                }
                let tm = 0.5 * (w[0] + w[1]);
                let px = [s[0] + tm * d[0], s[1] + tm * d[1]];
                let ix = (((px[0] - grid.x_min()) / grid.dx()).floor() as isize)
                    .clamp(0, grid.n_x() as isize - 1) as usize;
                let iy = (((px[1] - grid.y_min()) / grid.dy()).floor() as isize)
                    .clamp(0, grid.n_y() as isize - 1) as usize;
                let j = grid.linear(ix, iy);
                covered[j] = true;
                col_idx.push(j);
                weights.push(seg);
            }
            // Consecutive crossing midpoints visit distinct pixels, so the
            // row has no duplicate columns; sort it by pixel index.
            let row_cols = &mut col_idx[start..];
            let row_w = &mut weights[start..];
            let mut perm: Vec<usize> = (0..row_cols.len()).collect();
            perm.sort_unstable_by_key(|&t| row_cols[t]);
            let cols_sorted: Vec<usize> = perm.iter().map(|&t| row_cols[t]).collect();
            let w_sorted: Vec<f64> = perm.iter().map(|&t| row_w[t]).collect();
            row_cols.copy_from_slice(&cols_sorted);
            row_w.copy_from_slice(&w_sorted);
        }
        row_ptr.push(col_idx.len());
    }

    let uncovered: Vec<(usize, usize)> = (0..n)
        .filter(|&j| !covered[j])
        .map(|j| grid.coords(j))
        .collect();
    if !uncovered.is_empty() {
        return Err(Error::GeometryUncovered { pixels: uncovered });
    }

    Ok(SparseProjector {
        rows: m,
        cols: n,
        row_ptr,
        col_idx,
        weights,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_pixel_grid() -> ImageGrid {
        ImageGrid::new(1.0, 1.0, 1, 1).unwrap()
    }

    #[test]
    fn single_ray_through_unit_pixel_has_weight_one() {
        // Horizontal ray straight through the center of a 1 m x 1 m pixel.
        let grid = single_pixel_grid();
        let geom =
            FanBeamGeometry::new([-2.0, 0.0], [2.0, 0.0], [0.0, 1.0], 0.5, 1).unwrap();
        let a = build_fan_projector(&grid, &geom).unwrap();
        assert_eq!(a.rows(), 1);
        assert_eq!(a.cols(), 1);
        assert_eq!(a.nnz(), 1);
        let (j, w) = a.row(0).next().unwrap();
        assert_eq!(j, 0);
        assert!((w - 1.0).abs() < 1e-12, "weight {w}");
    }

    #[test]
    fn diagonal_ray_weight_is_sqrt_two() {
        // 45-degree ray through the center of the unit pixel.
        let grid = single_pixel_grid();
        let geom =
            FanBeamGeometry::new([-2.0, -2.0], [2.0, 2.0], [-1.0, 1.0], 0.5, 1).unwrap();
        let a = build_fan_projector(&grid, &geom).unwrap();
        let w = a.row_sum(0);
        assert!((w - 2.0f64.sqrt()).abs() < 1e-12, "weight {w}");
    }

    #[test]
    fn rays_missing_the_domain_give_empty_rows() {
        // Wide detector: central cells hit the pixel, edge cells miss.
        let grid = single_pixel_grid();
        let geom =
            FanBeamGeometry::new([-3.0, 0.0], [3.0, 0.0], [0.0, 1.0], 12.0, 9).unwrap();
        let a = build_fan_projector(&grid, &geom).unwrap();
        let empty = (0..9).filter(|&i| a.row(i).count() == 0).count();
        assert!(empty > 0, "expected some rays to miss");
        assert!(a.row(4).count() > 0, "central ray must hit");
        // Row sums of hit rays are chords, between 1 and sqrt(2).
        for i in 0..9 {
            let s = a.row_sum(i);
            assert!(s == 0.0 || (1.0 - 1e-9..=2.0f64.sqrt() + 1e-9).contains(&s));
        }
    }

    #[test]
    fn uncovered_pixels_are_reported() {
        // Deliberately short detector: the fan is too narrow to sweep the
        // whole domain.
        let grid = ImageGrid::new(1.0, 1.0, 16, 16).unwrap();
        let geom =
            FanBeamGeometry::new([-1.5, 0.0], [1.5, 0.0], [0.0, 1.0], 0.2, 8).unwrap();
        match build_fan_projector(&grid, &geom) {
            Err(Error::GeometryUncovered { pixels }) => {
                assert!(!pixels.is_empty());
                // Corner pixels are certainly outside the narrow fan.
                assert!(pixels.contains(&(0, 0)) && pixels.contains(&(0, 15)));
            }
            other => panic!("expected GeometryUncovered, got {other:?}"),
        }
    }

    #[test]
    fn source_inside_domain_is_rejected() {
        let grid = ImageGrid::new(1.0, 1.0, 4, 4).unwrap();
        let geom = FanBeamGeometry::new([0.2, 0.0], [2.0, 0.0], [0.0, 1.0], 4.0, 8).unwrap();
        assert!(matches!(
            build_fan_projector(&grid, &geom),
            Err(Error::InvalidGeometry(_))
        ));
    }

    #[test]
    fn source_on_detector_segment_is_rejected() {
        let grid = ImageGrid::new(1.0, 1.0, 4, 4).unwrap();
        let geom = FanBeamGeometry::new([2.0, 0.0], [2.0, 0.0], [0.0, 1.0], 4.0, 8).unwrap();
        assert!(matches!(
            build_fan_projector(&grid, &geom),
            Err(Error::InvalidGeometry(_))
        ));
    }

    #[test]
    fn adjoint_of_unit_measurement_scatters_one_row() {
        let grid = ImageGrid::new(1.0, 1.0, 8, 8).unwrap();
        let geom =
            FanBeamGeometry::new([-1.5, 0.0], [1.5, 0.0], [0.0, 1.0], 3.2, 32).unwrap();
        let a = build_fan_projector(&grid, &geom).unwrap();
        let mut e = vec![0.0; a.rows()];
        e[10] = 1.0;
        let bp = a.apply_adjoint(&e).unwrap();
        let from_row: Vec<(usize, f64)> = a.row(10).collect();
        let mut expected = vec![0.0; a.cols()];
        for (j, w) in from_row {
            expected[j] = w;
        }
        assert_eq!(bp, expected);
    }

    #[test]
    fn apply_rejects_wrong_dimensions() {
        let grid = ImageGrid::new(1.0, 1.0, 4, 4).unwrap();
        let geom =
            FanBeamGeometry::new([-1.5, 0.0], [1.5, 0.0], [0.0, 1.0], 3.2, 16).unwrap();
        let a = build_fan_projector(&grid, &geom).unwrap();
        assert!(matches!(
            a.apply(&vec![0.0; 3]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            a.apply_adjoint(&vec![0.0; 3]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn geometry_validation_rejects_degenerate_inputs() {
        assert!(FanBeamGeometry::new([0.0, 0.0], [1.0, 0.0], [0.0, 0.0], 1.0, 4).is_err());
        assert!(FanBeamGeometry::new([0.0, 0.0], [1.0, 0.0], [0.0, 1.0], 0.0, 4).is_err());
        assert!(FanBeamGeometry::new([0.0, 0.0], [1.0, 0.0], [0.0, 1.0], 1.0, 0).is_err());
        assert!(FanBeamGeometry::new([f64::NAN, 0.0], [1.0, 0.0], [0.0, 1.0], 1.0, 4).is_err());
    }

    #[test]
    fn triplet_dump_matches_row_iteration() {
        let grid = ImageGrid::new(1.0, 1.0, 2, 2).unwrap();
        let geom =
            FanBeamGeometry::new([-1.5, 0.0], [1.5, 0.0], [0.0, 1.0], 3.2, 4).unwrap();
        let a = build_fan_projector(&grid, &geom).unwrap();
        let mut buf = Vec::new();
        a.dump_triplets(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), a.nnz());
        let first: Vec<&str> = lines[0].split(' ').collect();
        assert_eq!(first.len(), 3);
        let w: f64 = first[2].parse().unwrap();
        assert!(w > 0.0);
    }
}
