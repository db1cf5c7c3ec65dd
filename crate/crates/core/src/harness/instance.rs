//! Turn a [`ProblemBundle`] into live operators: grid, geometry, sparse
//! projector, dictionary, composed operator, and its norm estimate.

use crate::dictionary::{build_dictionary, Dictionary, TranslationLattice};
use crate::error::Result;
use crate::grid::ImageGrid;
use crate::harness::config::ProblemBundle;
use crate::opnorm::{operator_norm, OperatorNorm};
use crate::projector::{build_fan_projector, FanBeamGeometry, SparseProjector};
use crate::solver::ProjectedDictionary;

/// Everything needed to run trials on one acquisition setup.
pub struct Instance {
    pub grid: ImageGrid,
    pub geometry: FanBeamGeometry,
    pub projector: SparseProjector,
    pub dictionary: Dictionary,
    pub projected: ProjectedDictionary,
    pub opnorm: OperatorNorm,
}

impl Instance {
    /// Measurements per pixel, the undersampling ratio reported on runs.
    pub fn undersampling(&self) -> f64 {
        self.grid.n() as f64 / self.projector.rows() as f64
    }
}

/// Build the full instance from a bundle.
pub fn build_instance(bundle: &ProblemBundle) -> Result<Instance> {
    let grid = ImageGrid::new(
        bundle.grid.extent_x,
        bundle.grid.extent_y,
        bundle.grid.n_x,
        bundle.grid.n_y,
    )?;
    let geometry = bundle.geometry.build()?;
    let projector = build_fan_projector(&grid, &geometry)?;
    let dictionary = build_dictionary(
        &bundle.dictionary.shapes,
        &TranslationLattice::PixelCenters {
            stride: bundle.dictionary.lattice_stride,
        },
        &bundle.dictionary.rotations.angles()?,
        &grid,
    )?;
    let projected = ProjectedDictionary::new(&projector, &dictionary)?;
    let opnorm = operator_norm(&projected);
    Ok(Instance {
        grid,
        geometry,
        projector,
        dictionary,
        projected,
        opnorm,
    })
}

/// Rebuild only the dictionary-dependent parts of an instance (used by
/// sweeps that vary the dictionary per point).
pub fn rebuild_dictionary(
    base: &Instance,
    dictionary_spec: &crate::harness::config::DictionarySpec,
) -> Result<(Dictionary, ProjectedDictionary, OperatorNorm)> {
    let dictionary = build_dictionary(
        &dictionary_spec.shapes,
        &TranslationLattice::PixelCenters {
            stride: dictionary_spec.lattice_stride,
        },
        &dictionary_spec.rotations.angles()?,
        &base.grid,
    )?;
    let projected = ProjectedDictionary::new(&base.projector, &dictionary)?;
    let opnorm = operator_norm(&projected);
    Ok((dictionary, projected, opnorm))
}
