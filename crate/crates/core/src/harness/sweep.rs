//! Success-rate sweeps: run many seeded trials per sweep point, varying
//! shape density, rotation count, shape size, or noise level, and record
//! per-trial and per-point statistics.
//!
//! Every artifact except `timings.csv` is a pure function of the config
//! (including its seed): phantom draws, noise, the solver, and formation
//! are all deterministic, and floats are written with shortest round-trip
//! formatting.

use std::fs;
use std::io::Write as _;
use std::path::Path;
use std::time::Instant;

use crate::dictionary::Dictionary;
use crate::error::{Error, Result};
use crate::former::form_image;
use crate::harness::config::{
    DictionarySpec, ExperimentConfig, PhantomDraw, RotationSpec, SweepVariable,
};
use crate::harness::instance::{build_instance, rebuild_dictionary, Instance};
use crate::harness::judge::judge_success;
use crate::harness::noise::add_noise;
use crate::harness::NOISE_SEED_SALT;
use crate::io::{write_pgm, write_profile_pgm, write_vector_csv};
use crate::opnorm::OperatorNorm;
use crate::phantom::{random_phantom, random_phantom_one_per_shape, Phantom};
use crate::shapes::{rasterize, Pose, ShapeSpec};
use crate::solver::{solve_projected, ProjectedDictionary, SolverConfig};
use crate::vecmath;

/// One `(sweep point, trial)` outcome. `note` is empty on clean trials and
/// carries the error text when a stage failed (a failed trial counts as an
/// unsuccessful one; it does not abort the sweep).
#[derive(Clone, Debug)]
pub struct TrialRecord {
    pub point_index: usize,
    pub point_value: f64,
    pub trial: usize,
    pub seed: u64,
    pub success: bool,
    pub relative_error: f64,
    pub formed_residual: f64,
    pub solver_residual: f64,
    pub iterations: usize,
    pub termination: String,
    pub note: String,
}

/// Per-point aggregate. `realized_value` equals `value` except for size
/// sweeps, where it reports the support pixel count actually achieved by
/// the fitted disc radius. `mean_wall_ms` is wall-clock and therefore
/// excluded from the deterministic report CSV.
#[derive(Clone, Debug)]
pub struct SweepRow {
    pub point_index: usize,
    pub value: f64,
    pub realized_value: f64,
    pub dictionary_columns: usize,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub mean_relative_error: f64,
    pub mean_formed_residual: f64,
    pub mean_iterations: f64,
    pub mean_wall_ms: f64,
}

/// Everything a sweep produced, already written to `config.out_dir`.
#[derive(Clone, Debug)]
pub struct SweepReport {
    pub variable: SweepVariable,
    pub rows: Vec<SweepRow>,
    pub records: Vec<TrialRecord>,
}

/// Smallest disc radius whose raster at a pixel-center pose covers at
/// least `target_pixels` pixels. Support size is a non-decreasing step
/// function of the radius, so a bisection on the radius finds the
/// smallest step at or above the target; exact equality is impossible for
/// most targets (pixel shells around a center come in symmetric bursts).
pub fn fit_disc_radius(
    grid: &crate::grid::ImageGrid,
    intensity: f64,
    target_pixels: usize,
) -> Result<(f64, usize)> {
    let count = |radius: f64| -> usize {
        let shape = ShapeSpec::Disc { radius, intensity };
        let pose = Pose::centered(0.0, grid.center(grid.n_x() / 2, grid.n_y() / 2));
        match rasterize(&shape, &pose, grid) {
            Ok(col) => col.indices.len(),
            Err(_) => 0,
        }
    };
    let mut lo = 0.0;
    let mut hi = 0.45 * grid.extent_x().min(grid.extent_y());
    if count(hi) < target_pixels {
        return Err(Error::InvalidConfig(format!(
            "shape size of {target_pixels} pixels is not achievable on this grid \
             (largest admissible disc covers {} pixels)",
            count(hi)
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if count(mid) >= target_pixels {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-12 * hi.max(1.0) {
            break;
        }
    }
    Ok((hi, count(hi)))
}

/// Draw a phantom according to the configured policy.
fn draw_phantom(
    dict: &Dictionary,
    draw: PhantomDraw,
    k: usize,
    seed: u64,
) -> Result<Phantom> {
    match draw {
        PhantomDraw::Random => random_phantom(dict, k, seed),
        PhantomDraw::OnePerShape => random_phantom_one_per_shape(dict, seed),
    }
}

/// Resolve the effective solver settings for one trial: library defaults
/// from `(p, ‖AΨ‖)`, then config overrides, then the optional discrepancy
/// stop `ε = max(ε, 1.05 · (noise%/100) · ‖y‖)`.
pub(crate) fn trial_solver_config(
    config: &ExperimentConfig,
    p: usize,
    opnorm: f64,
    k: usize,
    noise_percent: f64,
    y_clean_norm: f64,
) -> SolverConfig {
    let mut scfg = SolverConfig::defaults(p, opnorm, config.solver.mode, k as f64);
    if let Some(mi) = config.solver.max_iters {
        scfg.max_iters = mi;
    }
    if let Some(t) = config.solver.residual_tol {
        scfg.tol = t;
    }
    if config.solver.stop_at_noise_floor && noise_percent > 0.0 {
        scfg.tol = scfg.tol.max(1.05 * noise_percent / 100.0 * y_clean_norm);
    }
    scfg
}

struct TrialOutput {
    record: TrialRecord,
    /// `(phantom image, formed image, noisy measurements)` for artifact
    /// dumps; only kept for trial 0 of each point.
    sample: Option<(Vec<f64>, Vec<f64>, Vec<f64>)>,
}

#[allow(clippy::too_many_arguments)]
fn run_trial(
    config: &ExperimentConfig,
    base: &Instance,
    dict: &Dictionary,
    projected: &ProjectedDictionary,
    opnorm: &OperatorNorm,
    point_index: usize,
    point_value: f64,
    k: usize,
    noise_percent: f64,
    trial: usize,
    keep_sample: bool,
) -> TrialOutput {
    let seed = config.seed ^ trial as u64;
    let mut record = TrialRecord {
        point_index,
        point_value,
        trial,
        seed,
        success: false,
        relative_error: f64::NAN,
        formed_residual: f64::NAN,
        solver_residual: f64::NAN,
        iterations: 0,
        termination: String::new(),
        note: String::new(),
    };

    let run = || -> Result<(TrialRecord, (Vec<f64>, Vec<f64>, Vec<f64>))> {
        let mut rec = record.clone();
        let phantom = draw_phantom(dict, config.phantom_draw, k, seed)?;
        let y = base.projector.apply(&phantom.image)?;
        let y_clean_norm = vecmath::norm(&y);
        let y = add_noise(&y, noise_percent, seed ^ NOISE_SEED_SALT);

        let scfg = trial_solver_config(
            config,
            dict.p(),
            opnorm.value,
            k,
            noise_percent,
            y_clean_norm,
        );
        let sol = solve_projected(projected, &y, &scfg)?;
        let formed = form_image(&sol.z, &base.projector, dict, &y, k)?;

        rec.success = judge_success(&formed.image, &phantom.image, config.success_tolerance);
        rec.relative_error = vecmath::relative_error(&formed.image, &phantom.image);
        rec.formed_residual = formed.residual;
        rec.solver_residual = sol.residual;
        rec.iterations = sol.iterations;
        rec.termination = sol.termination.to_string();
        Ok((rec, (phantom.image, formed.image, y)))
    };

    match run() {
        Ok((rec, sample)) => TrialOutput {
            record: rec,
            sample: keep_sample.then_some(sample),
        },
        Err(e) => {
            record.note = e.to_string();
            TrialOutput {
                record,
                sample: None,
            }
        }
    }
}

fn write_point_samples(
    out_dir: &Path,
    point_index: usize,
    base: &Instance,
    sample: &(Vec<f64>, Vec<f64>, Vec<f64>),
) -> Result<()> {
    let (phantom, recon, y) = sample;
    write_pgm(
        &out_dir.join(format!("point{point_index}_phantom.pgm")),
        &base.grid,
        phantom,
    )?;
    write_pgm(
        &out_dir.join(format!("point{point_index}_recon.pgm")),
        &base.grid,
        recon,
    )?;
    write_vector_csv(
        &out_dir.join(format!("point{point_index}_measurements.csv")),
        "value",
        y,
    )?;
    write_profile_pgm(
        &out_dir.join(format!("point{point_index}_measurements.pgm")),
        y,
    )?;
    Ok(())
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut count) = (0.0, 0usize);
    for v in values {
        sum += v;
        count += 1;
    }
    if count == 0 {
        f64::NAN
    } else {
        sum / count as f64
    }
}

fn write_trials_csv(path: &Path, records: &[TrialRecord]) -> Result<()> {
    let mut w = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(
        w,
        "point_index,point_value,trial,seed,success,relative_error,formed_residual,\
         solver_residual,iterations,termination,note"
    )?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.point_index,
            r.point_value,
            r.trial,
            r.seed,
            r.success as u8,
            r.relative_error,
            r.formed_residual,
            r.solver_residual,
            r.iterations,
            r.termination,
            r.note.replace(',', ";").replace('\n', " "),
        )?;
    }
    w.flush()?;
    Ok(())
}

fn write_report_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut w = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(
        w,
        "point_index,value,realized_value,dictionary_columns,trials,successes,success_rate,\
         mean_relative_error,mean_formed_residual,mean_iterations"
    )?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            r.point_index,
            r.value,
            r.realized_value,
            r.dictionary_columns,
            r.trials,
            r.successes,
            r.success_rate,
            r.mean_relative_error,
            r.mean_formed_residual,
            r.mean_iterations,
        )?;
    }
    w.flush()?;
    Ok(())
}

fn write_timings_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut w = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(
        w,
        "# wall-clock timings; this file is NOT covered by the determinism contract"
    )?;
    writeln!(w, "point_index,value,mean_trial_ms")?;
    for r in rows {
        writeln!(w, "{},{},{:.3}", r.point_index, r.value, r.mean_wall_ms)?;
    }
    w.flush()?;
    Ok(())
}

/// Run the configured sweep and write all artifacts into `config.out_dir`:
/// `sweep_report.csv`, `trials.csv`, `manifest.json`, per-point sample
/// images from trial 0, and the non-deterministic `timings.csv`. Progress
/// goes to stdout unless `quiet`.
pub fn run_sweep(config: &ExperimentConfig, quiet: bool) -> Result<SweepReport> {
    config.validate()?;
    let sweep = config
        .sweep
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("run requires a `sweep` section".into()))?
        .clone();
    fs::create_dir_all(&config.out_dir)?;

    let base = build_instance(&config.instance)?;
    if !quiet {
        println!(
            "instance: {}x{} grid, {} rays, undersampling {:.1}x, base dictionary {} columns \
             (operator norm {:.6}, converged: {})",
            base.grid.n_x(),
            base.grid.n_y(),
            base.projector.rows(),
            base.undersampling(),
            base.dictionary.p(),
            base.opnorm.value,
            base.opnorm.converged,
        );
    }

    let mut rows = Vec::with_capacity(sweep.values.len());
    let mut records = Vec::with_capacity(sweep.values.len() * config.trials);

    for (point_index, &value) in sweep.values.iter().enumerate() {
        // Resolve this point's dictionary, budget, and noise level.
        let mut k = config.shapes_per_image;
        let mut noise_percent = config.noise_percent;
        let mut realized_value = value;
        let mut owned: Option<(Dictionary, ProjectedDictionary, OperatorNorm)> = None;
        match sweep.variable {
            SweepVariable::Density => {
                k = value as usize;
            }
            SweepVariable::Noise => {
                noise_percent = value;
            }
            SweepVariable::Rotations => {
                let mut spec: DictionarySpec = config.instance.dictionary.clone();
                spec.rotations = RotationSpec {
                    count: Some(value as usize),
                    angles: None,
                };
                owned = Some(rebuild_dictionary(&base, &spec)?);
            }
            SweepVariable::ShapeSize => {
                let intensity = match config.instance.dictionary.shapes[0] {
                    ShapeSpec::Disc { intensity, .. } => intensity,
                    _ => unreachable!("validated: shape_size needs a single disc"),
                };
                let (radius, support) =
                    fit_disc_radius(&base.grid, intensity, value as usize)?;
                realized_value = support as f64;
                let mut spec = config.instance.dictionary.clone();
                spec.shapes = vec![ShapeSpec::Disc { radius, intensity }];
                owned = Some(rebuild_dictionary(&base, &spec)?);
                if !quiet {
                    println!(
                        "point {point_index}: fitted disc radius {radius:.6} m -> {support} px \
                         (requested {value})"
                    );
                }
            }
        }
        let (dict, projected, opnorm): (&Dictionary, &ProjectedDictionary, &OperatorNorm) =
            match &owned {
                Some((d, pj, o)) => (d, pj, o),
                None => (&base.dictionary, &base.projected, &base.opnorm),
            };

        let started = Instant::now();
        let mut point_records = Vec::with_capacity(config.trials);
        for trial in 0..config.trials {
            let out = run_trial(
                config,
                &base,
                dict,
                projected,
                opnorm,
                point_index,
                value,
                k,
                noise_percent,
                trial,
                trial == 0,
            );
            if let Some(sample) = &out.sample {
                write_point_samples(&config.out_dir, point_index, &base, sample)?;
            }
            point_records.push(out.record);
        }
        let elapsed = started.elapsed().as_secs_f64();

        let clean = |f: fn(&TrialRecord) -> f64| {
            mean(
                point_records
                    .iter()
                    .filter(|r| r.note.is_empty())
                    .map(f),
            )
        };
        let successes = point_records.iter().filter(|r| r.success).count();
        let row = SweepRow {
            point_index,
            value,
            realized_value,
            dictionary_columns: dict.p(),
            trials: config.trials,
            successes,
            success_rate: successes as f64 / config.trials as f64,
            mean_relative_error: clean(|r| r.relative_error),
            mean_formed_residual: clean(|r| r.formed_residual),
            mean_iterations: clean(|r| r.iterations as f64),
            mean_wall_ms: 1e3 * elapsed / config.trials as f64,
        };
        if !quiet {
            println!(
                "point {point_index} ({:?}={}): p={} successes={}/{} rate={:.3} \
                 mean_rel_err={:.3e} ({:.1} ms/trial)",
                sweep.variable,
                value,
                row.dictionary_columns,
                successes,
                config.trials,
                row.success_rate,
                row.mean_relative_error,
                row.mean_wall_ms,
            );
        }
        rows.push(row);
        records.extend(point_records);
    }

    write_report_csv(&config.out_dir.join("sweep_report.csv"), &rows)?;
    write_trials_csv(&config.out_dir.join("trials.csv"), &records)?;
    write_timings_csv(&config.out_dir.join("timings.csv"), &rows)?;
    fs::write(
        config.out_dir.join("manifest.json"),
        config.manifest_json()?,
    )?;

    Ok(SweepReport {
        variable: sweep.variable,
        rows,
        records,
    })
}
