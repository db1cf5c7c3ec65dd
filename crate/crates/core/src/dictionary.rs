//! Shape dictionary: sparse rasterized columns for every admissible pose.
//!
//! Columns enumerate shapes × rotations × shifts in a fixed deterministic
//! order (shape-major, then rotation, then shift, shifts row-major bottom
//! to top). Poses that rasterize empty are skipped; rasters that are
//! bitwise identical to an earlier column are deduplicated, keeping the
//! first pose's metadata (a disc, for example, collapses all rotations).

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::grid::ImageGrid;
use crate::opnorm::LinearOperator;
use crate::shapes::{rasterize, Pose, ShapeSpec};

/// Sparse image column: parallel arrays of linear pixel indices (strictly
/// increasing) and positive intensity values.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseColumn {
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseColumn {
    /// Euclidean norm of the column.
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Scatter `scale *` this column into a dense image.
    pub fn add_into(&self, scale: f64, x: &mut [f64]) {
        for (&j, &v) in self.indices.iter().zip(&self.values) {
            x[j] += scale * v;
        }
    }

    /// Inner product with a dense image.
    pub fn dot(&self, x: &[f64]) -> f64 {
        self.indices
            .iter()
            .zip(&self.values)
            .map(|(&j, &v)| v * x[j])
            .sum()
    }
}

/// Provenance of a dictionary column.
#[derive(Clone, Debug, PartialEq)]
pub struct ColumnMeta {
    /// Index into the shape list passed to [`build_dictionary`].
    pub shape_index: usize,
    pub pose: Pose,
}

/// Where shape centers may be placed.
#[derive(Clone, Debug, PartialEq)]
pub enum TranslationLattice {
    /// Shape centers on pixel centers (every `stride`-th pixel in each
    /// axis), restricted per shape so its bounding disc stays inside the
    /// image domain. This guarantees no column is a clipped shape.
    PixelCenters { stride: usize },
    /// Explicit list of center points, used as-is for every shape. The
    /// caller is responsible for keeping supports in-domain; poses that
    /// rasterize partially are kept as clipped columns.
    Explicit(Vec<[f64; 2]>),
}

impl TranslationLattice {
    /// Candidate shape-center positions for a shape of bounding radius
    /// `margin`, ordered row-major bottom-to-top.
    pub fn centers_for(&self, grid: &ImageGrid, margin: f64) -> Vec<[f64; 2]> {
        match self {
            TranslationLattice::PixelCenters { stride } => {
                let stride = (*stride).max(1);
                let mut centers = Vec::new();
                for iy in (0..grid.n_y()).step_by(stride) {
                    for ix in (0..grid.n_x()).step_by(stride) {
                        let c = grid.center(ix, iy);
                        if c[0] - margin >= grid.x_min()
                            && c[0] + margin <= grid.x_max()
                            && c[1] - margin >= grid.y_min()
                            && c[1] + margin <= grid.y_max()
                        {
                            centers.push(c);
                        }
                    }
                }
                centers
            }
            TranslationLattice::Explicit(list) => list.clone(),
        }
    }
}

/// Dictionary `Ψ ∈ R^{n×p}`: `p` sparse nonnegative columns over `n`
/// pixels, with per-column pose metadata.
#[derive(Clone, Debug)]
pub struct Dictionary {
    n: usize,
    shape_count: usize,
    columns: Vec<SparseColumn>,
    meta: Vec<ColumnMeta>,
}

impl Dictionary {
    /// Number of pixels (rows of `Ψ`).
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of columns.
    pub fn p(&self) -> usize {
        self.columns.len()
    }

    /// Number of shape families the dictionary was built from.
    pub fn shape_count(&self) -> usize {
        self.shape_count
    }

    pub fn column(&self, k: usize) -> &SparseColumn {
        &self.columns[k]
    }

    pub fn meta(&self, k: usize) -> &ColumnMeta {
        &self.meta[k]
    }

    /// Dense synthesis `x = Ψ z`.
    pub fn synthesize(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.p() {
            return Err(Error::DimensionMismatch {
                context: "dictionary synthesize",
                expected: self.p(),
                got: z.len(),
            });
        }
        let mut x = vec![0.0; self.n];
        for (k, col) in self.columns.iter().enumerate() {
            if z[k] != 0.0 {
                col.add_into(z[k], &mut x);
            }
        }
        Ok(x)
    }
}

impl LinearOperator for Dictionary {
    fn rows(&self) -> usize {
        self.n
    }

    fn cols(&self) -> usize {
        self.p()
    }

    fn apply(&self, z: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for (k, col) in self.columns.iter().enumerate() {
            if z[k] != 0.0 {
                col.add_into(z[k], out);
            }
        }
    }

    fn apply_transpose(&self, x: &[f64], out: &mut [f64]) {
        for (k, col) in self.columns.iter().enumerate() {
            out[k] = col.dot(x);
        }
    }
}

fn raster_key(col: &SparseColumn) -> Vec<(usize, u64)> {
    col.indices
        .iter()
        .zip(&col.values)
        .map(|(&j, &v)| (j, v.to_bits()))
        .collect()
}

/// Build the dictionary for `shapes` under every pose in
/// `rotations × lattice`. Column order is a pure function of the inputs.
/// Fails with [`Error::EmptyDictionary`] when no pose rasterizes to a
/// nonempty in-budget column, and propagates shape validation errors.
pub fn build_dictionary(
    shapes: &[ShapeSpec],
    lattice: &TranslationLattice,
    rotations: &[f64],
    grid: &ImageGrid,
) -> Result<Dictionary> {
    if shapes.is_empty() {
        return Err(Error::InvalidShape("shape list is empty".into()));
    }
    if rotations.is_empty() {
        return Err(Error::InvalidConfig("rotation list is empty".into()));
    }
    for s in shapes {
        s.validate()?;
    }

    let mut columns = Vec::new();
    let mut meta = Vec::new();
    let mut seen: HashSet<Vec<(usize, u64)>> = HashSet::new();

    for (si, shape) in shapes.iter().enumerate() {
        let centers = lattice.centers_for(grid, shape.bounding_radius());
        for &angle in rotations {
            for &c in &centers {
                let pose = Pose::centered(angle, c);
                let col = match rasterize(shape, &pose, grid) {
                    Ok(col) => col,
                    Err(Error::EmptyRaster) => continue,
                    Err(e) => return Err(e),
                };
                if seen.insert(raster_key(&col)) {
                    columns.push(col);
                    meta.push(ColumnMeta {
                        shape_index: si,
                        pose,
                    });
                }
            }
        }
    }

    if columns.is_empty() {
        return Err(Error::EmptyDictionary);
    }
    Ok(Dictionary {
        n: grid.n(),
        shape_count: shapes.len(),
        columns,
        meta,
    })
}
