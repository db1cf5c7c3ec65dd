//! The side-by-side reference case: one mixed-shape phantom, one set of
//! measurements, both constraint modes solved on it. The box-and-budget
//! mode should land on the true binary coefficients, while the plain
//! `ℓ1`-ball mode — the only difference is the projection step — lands
//! measurably farther from them. Artifacts include both coefficient
//! vectors against the truth, both reconstructions, and both residual
//! traces.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::former::form_image;
use crate::harness::config::{ExperimentConfig, PhantomDraw};
use crate::harness::instance::{build_instance, Instance};
use crate::harness::judge::judge_success;
use crate::harness::noise::add_noise;
use crate::harness::sweep::trial_solver_config;
use crate::harness::NOISE_SEED_SALT;
use crate::io::{
    write_image_csv, write_pgm, write_profile_pgm, write_trace_csv, write_vector_csv,
};
use crate::phantom::{random_phantom, random_phantom_one_per_shape, Phantom};
use crate::solver::{solve_projected, ConstraintMode, SolverConfig};
use crate::vecmath;

/// What one constraint mode achieved on the shared instance.
#[derive(Clone, Debug, Serialize)]
pub struct ModeOutcome {
    pub mode: String,
    /// Euclidean distance `‖z̄ − z*‖` from the true binary coefficients.
    pub coefficient_distance: f64,
    /// Relative image error `‖x̄ − x*‖ / ‖x*‖` after formation.
    pub relative_error: f64,
    pub formed_residual: f64,
    pub solver_residual: f64,
    pub iterations: usize,
    pub termination: String,
    pub success: bool,
}

/// Everything the reference case produced, also written to `summary.json`.
#[derive(Clone, Debug, Serialize)]
pub struct ReferenceReport {
    pub seed: u64,
    pub noise_percent: f64,
    pub dictionary_columns: usize,
    pub shapes_per_image: usize,
    pub undersampling: f64,
    pub cosharp: ModeOutcome,
    pub ssc: ModeOutcome,
}

/// The built-in mixed-shape scenario: a 64×64 desk-scale grid observed by
/// one 256-cell fan beam, a four-family dictionary (disc, ellipse, annular
/// disc, elliptical shell), one random instance per family. Runs in
/// seconds yet exercises every shape kind, rotation handling, and both
/// constraint modes.
pub fn reference_config(out_dir: &Path, seed: u64) -> ExperimentConfig {
    let json = format!(
        r#"{{
        "grid": {{"extent_x": 1.0, "extent_y": 1.0, "n_x": 64, "n_y": 64}},
        "geometry": {{
            "source": [-1.5, 0.0],
            "detector_center": [1.5, 0.0],
            "detector_direction": [0.0, 1.0],
            "detector_length": 3.2,
            "detector_count": 256
        }},
        "dictionary": {{
            "shapes": [
                {{"kind": "disc", "radius": 0.07, "intensity": 1.0}},
                {{"kind": "ellipse", "semi_axis_a": 0.1, "semi_axis_b": 0.05,
                  "intensity": 0.7}},
                {{"kind": "radial_disc", "radii": [0.03, 0.05, 0.07, 0.09],
                  "intensities": [1.0, 0.75, 0.5, 0.25]}},
                {{"kind": "ellipsoidal_shell", "outer_a": 0.2, "outer_b": 0.05,
                  "inner_a": 0.15, "inner_b": 0.03, "intensity": 0.85}}
            ],
            "lattice_stride": 6,
            "rotations": {{"count": 4}}
        }},
        "trials": 1,
        "seed": {seed},
        "shapes_per_image": 4,
        "phantom_draw": "one_per_shape",
        "out_dir": {:?}
    }}"#,
        out_dir.to_str().unwrap_or("out/reference")
    );
    serde_json::from_str(&json).expect("built-in reference config must parse")
}

fn solve_one_mode(
    config: &ExperimentConfig,
    instance: &Instance,
    phantom: &Phantom,
    y: &[f64],
    y_clean_norm: f64,
    mode: ConstraintMode,
) -> Result<(ModeOutcome, Vec<f64>, Vec<f64>, Vec<f64>)> {
    let k = phantom.k();
    let mut scfg: SolverConfig = trial_solver_config(
        config,
        instance.dictionary.p(),
        instance.opnorm.value,
        k,
        config.noise_percent,
        y_clean_norm,
    );
    scfg.mode = mode;
    let sol = solve_projected(&instance.projected, y, &scfg)?;
    let formed = form_image(&sol.z, &instance.projector, &instance.dictionary, y, k)?;
    let outcome = ModeOutcome {
        mode: mode.to_string(),
        coefficient_distance: vecmath::distance(&sol.z, &phantom.coefficients),
        relative_error: vecmath::relative_error(&formed.image, &phantom.image),
        formed_residual: formed.residual,
        solver_residual: sol.residual,
        iterations: sol.iterations,
        termination: sol.termination.to_string(),
        success: judge_success(&formed.image, &phantom.image, config.success_tolerance),
    };
    Ok((outcome, sol.z, sol.trace, formed.image))
}

fn write_coefficients_csv(path: &Path, z: &[f64], truth: &[f64]) -> Result<()> {
    let mut w = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(w, "index,value,truth")?;
    for (i, (v, t)) in z.iter().zip(truth).enumerate() {
        writeln!(w, "{},{},{}", i, v, t)?;
    }
    w.flush()?;
    Ok(())
}

/// Run the two-mode reference case defined by `config` (any config without
/// a sweep section works; [`reference_config`] is the built-in instance).
/// Writes phantom/measurement/reconstruction/trace artifacts plus
/// `summary.json` and `manifest.json` into `config.out_dir`.
pub fn run_reference_case(config: &ExperimentConfig, quiet: bool) -> Result<ReferenceReport> {
    config.validate()?;
    if config.sweep.is_some() {
        return Err(Error::InvalidConfig(
            "the reference case takes a sweep-free config; use `run` for sweeps".into(),
        ));
    }
    fs::create_dir_all(&config.out_dir)?;

    let instance = build_instance(&config.instance)?;
    if !quiet {
        println!(
            "reference instance: {}x{} grid, {} rays, {} columns, operator norm {:.6}",
            instance.grid.n_x(),
            instance.grid.n_y(),
            instance.projector.rows(),
            instance.dictionary.p(),
            instance.opnorm.value,
        );
    }

    let phantom = match config.phantom_draw {
        PhantomDraw::Random => {
            random_phantom(&instance.dictionary, config.shapes_per_image, config.seed)?
        }
        PhantomDraw::OnePerShape => {
            random_phantom_one_per_shape(&instance.dictionary, config.seed)?
        }
    };
    let y_clean = instance.projector.apply(&phantom.image)?;
    let y_clean_norm = vecmath::norm(&y_clean);
    let y = add_noise(&y_clean, config.noise_percent, config.seed ^ NOISE_SEED_SALT);

    let (cosharp, z_c, trace_c, recon_c) = solve_one_mode(
        config,
        &instance,
        &phantom,
        &y,
        y_clean_norm,
        ConstraintMode::Cosharp,
    )?;
    let (ssc, z_s, trace_s, recon_s) = solve_one_mode(
        config,
        &instance,
        &phantom,
        &y,
        y_clean_norm,
        ConstraintMode::Ssc,
    )?;

    let out = &config.out_dir;
    write_pgm(&out.join("phantom.pgm"), &instance.grid, &phantom.image)?;
    write_image_csv(&out.join("phantom.csv"), &instance.grid, &phantom.image)?;
    write_vector_csv(&out.join("measurements.csv"), "value", &y)?;
    write_profile_pgm(&out.join("measurements.pgm"), &y)?;
    for (name, z, trace, recon) in [
        ("cosharp", &z_c, &trace_c, &recon_c),
        ("ssc", &z_s, &trace_s, &recon_s),
    ] {
        write_coefficients_csv(
            &out.join(format!("{name}_coefficients.csv")),
            z,
            &phantom.coefficients,
        )?;
        write_pgm(&out.join(format!("{name}_recon.pgm")), &instance.grid, recon)?;
        write_image_csv(
            &out.join(format!("{name}_recon.csv")),
            &instance.grid,
            recon,
        )?;
        write_trace_csv(&out.join(format!("{name}_trace.csv")), trace)?;
    }

    let report = ReferenceReport {
        seed: config.seed,
        noise_percent: config.noise_percent,
        dictionary_columns: instance.dictionary.p(),
        shapes_per_image: phantom.k(),
        undersampling: instance.undersampling(),
        cosharp,
        ssc,
    };
    fs::write(
        out.join("summary.json"),
        serde_json::to_string_pretty(&report)?,
    )?;
    fs::write(out.join("manifest.json"), config.manifest_json()?)?;

    if !quiet {
        for m in [&report.cosharp, &report.ssc] {
            println!(
                "{}: |z - z*| = {:.6e}, rel err = {:.6e}, iterations = {}, success = {}",
                m.mode, m.coefficient_distance, m.relative_error, m.iterations, m.success
            );
        }
    }
    Ok(report)
}
