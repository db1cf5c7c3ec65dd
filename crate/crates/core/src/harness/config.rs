//! JSON experiment configuration: schema, defaults, validation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::projector::FanBeamGeometry;
use crate::shapes::ShapeSpec;
use crate::solver::ConstraintMode;

/// Grid section of a config file.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridSpec {
    pub extent_x: f64,
    pub extent_y: f64,
    pub n_x: usize,
    pub n_y: usize,
}

/// Geometry section; mirrors [`FanBeamGeometry`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeometrySpec {
    pub source: [f64; 2],
    pub detector_center: [f64; 2],
    pub detector_direction: [f64; 2],
    pub detector_length: f64,
    pub detector_count: usize,
}

impl GeometrySpec {
    pub fn build(&self) -> Result<FanBeamGeometry> {
        FanBeamGeometry::new(
            self.source,
            self.detector_center,
            self.detector_direction,
            self.detector_length,
            self.detector_count,
        )
    }
}

/// Rotation angles for dictionary poses: either an explicit list of
/// radians or a count of evenly spaced angles in `[0, π)` (every built-in
/// shape is centrally symmetric, so `[π, 2π)` repeats the first half).
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct RotationSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angles: Option<Vec<f64>>,
}

impl RotationSpec {
    pub fn evenly_spaced(count: usize) -> Vec<f64> {
        (0..count)
            .map(|j| j as f64 * std::f64::consts::PI / count as f64)
            .collect()
    }

    /// Resolve to a concrete angle list (default: the single angle 0).
    pub fn angles(&self) -> Result<Vec<f64>> {
        match (&self.angles, self.count) {
            (Some(_), Some(_)) => Err(Error::InvalidConfig(
                "rotations: give either `count` or `angles`, not both".into(),
            )),
            (Some(list), None) => {
                if list.is_empty() {
                    return Err(Error::InvalidConfig("rotations.angles is empty".into()));
                }
                Ok(list.clone())
            }
            (None, Some(0)) => Err(Error::InvalidConfig("rotations.count must be >= 1".into())),
            (None, Some(c)) => Ok(Self::evenly_spaced(c)),
            (None, None) => Ok(vec![0.0]),
        }
    }
}

fn default_stride() -> usize {
    1
}

/// Dictionary section: shape families, shift lattice stride, rotations.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DictionarySpec {
    pub shapes: Vec<ShapeSpec>,
    /// Pixel stride of the shift lattice (1 = every pixel center).
    #[serde(default = "default_stride")]
    pub lattice_stride: usize,
    #[serde(default)]
    pub rotations: RotationSpec,
}

/// What a sweep varies. Values are parsed as `f64` and interpreted per
/// variable (counts are rounded integers).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    /// Shape budget `K` per image.
    Density,
    /// Number of dictionary rotation angles.
    Rotations,
    /// Disc size in pixels (the disc radius is fitted numerically).
    ShapeSize,
    /// Noise level in percent of `‖y‖`.
    Noise,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
}

/// Solver options within a config. `max_iters`/`residual_tol` override the
/// defaults derived from `(p, ‖AΨ‖)`; `stop_at_noise_floor` additionally
/// raises the stop tolerance to `1.05 · (noise%/100) · ‖y‖` (a discrepancy
/// stop: under noise the misfit cannot drop below the noise norm, so
/// iterating past it buys nothing).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolverSpec {
    #[serde(default = "default_mode")]
    pub mode: ConstraintMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual_tol: Option<f64>,
    #[serde(default)]
    pub stop_at_noise_floor: bool,
}

fn default_mode() -> ConstraintMode {
    ConstraintMode::Cosharp
}

impl Default for SolverSpec {
    fn default() -> Self {
        Self {
            mode: ConstraintMode::Cosharp,
            max_iters: None,
            residual_tol: None,
            stop_at_noise_floor: false,
        }
    }
}

/// How phantoms are drawn per trial.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhantomDraw {
    /// `K` columns uniformly at random with disjoint supports.
    #[default]
    Random,
    /// One random column per shape family (requires `K` = family count);
    /// the mixed-shape reference scenario.
    OnePerShape,
}

/// The instance part shared by `run`, `solve`, and `form`: everything
/// needed to build the operator and the dictionary.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProblemBundle {
    pub grid: GridSpec,
    pub geometry: GeometrySpec,
    pub dictionary: DictionarySpec,
}

fn default_trials() -> usize {
    100
}

fn default_success_tolerance() -> f64 {
    1e-3
}

fn default_shapes_per_image() -> usize {
    1
}

/// Top-level experiment configuration (JSON).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub instance: ProblemBundle,
    /// Sweep variable and point list; optional for the reference case.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Noise level in percent of `‖y‖` (0 = noiseless).
    #[serde(default)]
    pub noise_percent: f64,
    pub seed: u64,
    /// Relative-error threshold for judging a reconstruction successful.
    #[serde(default = "default_success_tolerance")]
    pub success_tolerance: f64,
    pub out_dir: PathBuf,
    /// Shape budget `K` for sweeps that do not vary it.
    #[serde(default = "default_shapes_per_image")]
    pub shapes_per_image: usize,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub phantom_draw: PhantomDraw,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be >= 1".into()));
        }
        if !(self.noise_percent >= 0.0 && self.noise_percent.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "noise_percent must be >= 0, got {}",
                self.noise_percent
            )));
        }
        if !(self.success_tolerance > 0.0 && self.success_tolerance.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "success_tolerance must be positive, got {}",
                self.success_tolerance
            )));
        }
        if self.shapes_per_image == 0 {
            return Err(Error::InvalidConfig("shapes_per_image must be >= 1".into()));
        }
        if self.instance.dictionary.shapes.is_empty() {
            return Err(Error::InvalidConfig("dictionary.shapes is empty".into()));
        }
        for s in &self.instance.dictionary.shapes {
            s.validate()?;
        }
        if self.instance.dictionary.lattice_stride == 0 {
            return Err(Error::InvalidConfig("lattice_stride must be >= 1".into()));
        }
        self.instance.dictionary.rotations.angles()?;
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(Error::InvalidConfig("sweep.values is empty".into()));
            }
            for &v in &sweep.values {
                let ok = match sweep.variable {
                    SweepVariable::Density | SweepVariable::Rotations => {
                        v >= 1.0 && v.fract() == 0.0
                    }
                    SweepVariable::ShapeSize => v >= 1.0 && v.fract() == 0.0,
                    SweepVariable::Noise => v >= 0.0 && v.is_finite(),
                };
                if !ok {
                    return Err(Error::InvalidConfig(format!(
                        "sweep value {v} is invalid for {:?}",
                        sweep.variable
                    )));
                }
            }
            if sweep.variable == SweepVariable::Density
                && self.phantom_draw == PhantomDraw::OnePerShape
            {
                return Err(Error::InvalidConfig(
                    "density sweeps vary the shape budget and cannot use one_per_shape draws"
                        .into(),
                ));
            }
            if sweep.variable == SweepVariable::ShapeSize {
                let is_single_disc = self.instance.dictionary.shapes.len() == 1
                    && matches!(
                        self.instance.dictionary.shapes[0],
                        ShapeSpec::Disc { .. }
                    );
                if !is_single_disc {
                    return Err(Error::InvalidConfig(
                        "shape_size sweeps require a dictionary of exactly one disc".into(),
                    ));
                }
            }
        }
        if let Some(t) = self.solver.residual_tol {
            if !(t >= 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "solver.residual_tol must be >= 0, got {t}"
                )));
            }
        }
        if self.solver.max_iters == Some(0) {
            return Err(Error::InvalidConfig("solver.max_iters must be >= 1".into()));
        }
        if self.phantom_draw == PhantomDraw::OnePerShape
            && self.shapes_per_image != self.instance.dictionary.shapes.len()
        {
            return Err(Error::InvalidConfig(format!(
                "one_per_shape draws need shapes_per_image ({}) equal to the number of shape \
                 families ({})",
                self.shapes_per_image,
                self.instance.dictionary.shapes.len()
            )));
        }
        Ok(())
    }

    /// Serialize the fully resolved config (with CLI overrides applied)
    /// plus provenance fields into a run-manifest JSON string.
    pub fn manifest_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Manifest<'a> {
            tool: &'static str,
            version: &'static str,
            config: &'a ExperimentConfig,
        }
        Ok(serde_json::to_string_pretty(&Manifest {
            tool: "cosharp",
            version: env!("CARGO_PKG_VERSION"),
            config: self,
        })?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_json() -> String {
        r#"{
            "grid": {"extent_x": 1.0, "extent_y": 1.0, "n_x": 16, "n_y": 16},
            "geometry": {
                "source": [-1.5, 0.0],
                "detector_center": [1.5, 0.0],
                "detector_direction": [0.0, 1.0],
                "detector_length": 3.2,
                "detector_count": 32
            },
            "dictionary": {
                "shapes": [{"kind": "disc", "radius": 0.1, "intensity": 1.0}],
                "lattice_stride": 4
            },
            "sweep": {"variable": "density", "values": [1, 2]},
            "trials": 3,
            "seed": 7,
            "out_dir": "out/test"
        }"#
        .to_string()
    }

    #[test]
    fn minimal_config_parses_with_defaults() {
        let cfg: ExperimentConfig = serde_json::from_str(&minimal_json()).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.trials, 3);
        assert_eq!(cfg.noise_percent, 0.0);
        assert_eq!(cfg.success_tolerance, 1e-3);
        assert_eq!(cfg.solver.mode, ConstraintMode::Cosharp);
        assert_eq!(cfg.phantom_draw, PhantomDraw::Random);
        assert_eq!(cfg.instance.dictionary.rotations.angles().unwrap(), vec![0.0]);
    }

    #[test]
    fn zero_trials_fail_validation() {
        let mut cfg: ExperimentConfig = serde_json::from_str(&minimal_json()).unwrap();
        cfg.trials = 0;
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn negative_noise_fails_validation() {
        let mut cfg: ExperimentConfig = serde_json::from_str(&minimal_json()).unwrap();
        cfg.noise_percent = -1.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn fractional_density_values_fail() {
        let mut cfg: ExperimentConfig = serde_json::from_str(&minimal_json()).unwrap();
        cfg.sweep.as_mut().unwrap().values = vec![1.5];
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn rotation_spec_resolves() {
        let r = RotationSpec {
            count: Some(4),
            angles: None,
        };
        let a = r.angles().unwrap();
        assert_eq!(a.len(), 4);
        assert_eq!(a[0], 0.0);
        assert!((a[1] - std::f64::consts::PI / 4.0).abs() < 1e-15);
        assert!(RotationSpec {
            count: Some(2),
            angles: Some(vec![0.0])
        }
        .angles()
        .is_err());
    }

    #[test]
    fn manifest_embeds_resolved_config() {
        let cfg: ExperimentConfig = serde_json::from_str(&minimal_json()).unwrap();
        let manifest = cfg.manifest_json().unwrap();
        assert!(manifest.contains("\"version\""));
        assert!(manifest.contains("\"seed\": 7"));
    }

    #[test]
    fn shape_size_sweep_requires_single_disc() {
        let mut cfg: ExperimentConfig = serde_json::from_str(&minimal_json()).unwrap();
        cfg.sweep = Some(SweepSpec {
            variable: SweepVariable::ShapeSize,
            values: vec![4.0],
        });
        assert!(cfg.validate().is_ok());
        cfg.instance.dictionary.shapes.push(ShapeSpec::Ellipse {
            semi_axis_a: 0.1,
            semi_axis_b: 0.05,
            intensity: 1.0,
        });
        assert!(cfg.validate().is_err());
    }
}
