//! `cosharp` — single-shot fan-beam shape-sensing experiments from the
//! command line: config-driven sweeps, a two-mode reference case, and
//! direct solve/form/project plumbing for scripting and debugging.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use cosharp::harness::{
    build_instance, reference_config, run_reference_case, run_sweep, ExperimentConfig,
    ProblemBundle,
};
use cosharp::io::{read_vector_csv, write_image_csv, write_pgm, write_trace_csv, write_vector_csv};
use cosharp::prox::{project_ksimplex, project_l1_ball};
use cosharp::solver::{solve_projected, ConstraintMode, SolverConfig};
use cosharp::{form_image, vecmath};

#[derive(Parser)]
#[command(
    name = "cosharp",
    version,
    about = "Single-shot fan-beam shape sensing: dictionary-constrained convex recovery"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep described by a JSON config file.
    Run(RunArgs),
    /// Run the two-mode reference comparison (built-in scenario by default).
    Reference(ReferenceArgs),
    /// Solve one instance: measurements in, coefficients out.
    Solve(SolveArgs),
    /// Form a K-shape image from solved coefficients.
    Form(FormArgs),
    /// Project a vector onto a constraint set (scripting utility).
    Project(ProjectArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to the experiment config (JSON).
    config: PathBuf,
    /// Override the config's base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's output directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Override the number of trials per sweep point.
    #[arg(long)]
    trials: Option<usize>,
    /// Override the noise level (percent of the measurement norm).
    #[arg(long)]
    noise: Option<f64>,
    /// Override the constraint mode: "cosharp" or "ssc".
    #[arg(long)]
    mode: Option<String>,
    /// Suppress progress output.
    #[arg(long)]
    quiet: bool,
}

#[derive(Args)]
struct ReferenceArgs {
    /// Optional config path; defaults to the built-in mixed-shape scenario.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed for the built-in scenario (or a config override).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: out/reference).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Noise level override (percent of the measurement norm).
    #[arg(long)]
    noise: Option<f64>,
    /// Suppress progress output.
    #[arg(long)]
    quiet: bool,
}

#[derive(Args)]
struct SolveArgs {
    /// JSON file holding grid/geometry/dictionary sections.
    #[arg(long)]
    bundle: PathBuf,
    /// CSV of measurements (one value per detector cell).
    #[arg(long)]
    measurements: PathBuf,
    /// Shape budget K.
    #[arg(long)]
    k: f64,
    /// Constraint mode: "cosharp" or "ssc".
    #[arg(long, default_value = "cosharp")]
    mode: String,
    /// Override the default iteration cap (4p²).
    #[arg(long)]
    max_iters: Option<usize>,
    /// Override the default residual tolerance (1e-6).
    #[arg(long)]
    tol: Option<f64>,
    /// Also dump the sparse projector as "row col weight" triplets.
    #[arg(long)]
    dump_projector: bool,
    /// Output directory (default: out/solve).
    #[arg(long, default_value = "out/solve")]
    out_dir: PathBuf,
    /// Suppress progress output.
    #[arg(long)]
    quiet: bool,
}

#[derive(Args)]
struct FormArgs {
    /// JSON file holding grid/geometry/dictionary sections.
    #[arg(long)]
    bundle: PathBuf,
    /// CSV of solved coefficients (index,value).
    #[arg(long)]
    coefficients: PathBuf,
    /// CSV of measurements the coefficients were solved against.
    #[arg(long)]
    measurements: PathBuf,
    /// Shape budget K (number of columns to accept).
    #[arg(long)]
    k: usize,
    /// Output directory (default: out/form).
    #[arg(long, default_value = "out/form")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct ProjectArgs {
    /// CSV of the vector to project (index,value).
    #[arg(long)]
    input: PathBuf,
    /// Budget parameter of the constraint set.
    #[arg(long)]
    k: f64,
    /// Constraint set: "ksimplex" (0 ≤ z ≤ 1, Σz = K) or "l1ball" (‖z‖₁ ≤ K).
    #[arg(long, default_value = "ksimplex")]
    set: String,
    /// Output CSV path.
    #[arg(long)]
    output: PathBuf,
}

fn parse_mode(s: &str) -> Result<ConstraintMode> {
    match s {
        "cosharp" => Ok(ConstraintMode::Cosharp),
        "ssc" => Ok(ConstraintMode::Ssc),
        other => bail!("unknown mode {other:?}; expected \"cosharp\" or \"ssc\""),
    }
}

fn load_bundle(path: &Path) -> Result<ProblemBundle> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading bundle {}", path.display()))?;
    let bundle: ProblemBundle = serde_json::from_str(&text)
        .with_context(|| format!("parsing bundle {}", path.display()))?;
    Ok(bundle)
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let mut config = ExperimentConfig::load(&args.config)
        .with_context(|| format!("loading config {}", args.config.display()))?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(dir) = args.out_dir {
        config.out_dir = dir;
    }
    if let Some(trials) = args.trials {
        config.trials = trials;
    }
    if let Some(noise) = args.noise {
        config.noise_percent = noise;
    }
    if let Some(mode) = &args.mode {
        config.solver.mode = parse_mode(mode)?;
    }
    let report = run_sweep(&config, args.quiet)?;
    if !args.quiet {
        println!(
            "wrote {} sweep points x {} trials to {}",
            report.rows.len(),
            config.trials,
            config.out_dir.display()
        );
    }
    Ok(())
}

fn cmd_reference(args: ReferenceArgs) -> Result<()> {
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::load(path)
            .with_context(|| format!("loading config {}", path.display()))?,
        None => reference_config(
            args.out_dir
                .as_deref()
                .unwrap_or(Path::new("out/reference")),
            args.seed.unwrap_or(42),
        ),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(dir) = args.out_dir {
        config.out_dir = dir;
    }
    if let Some(noise) = args.noise {
        config.noise_percent = noise;
    }
    run_reference_case(&config, args.quiet)?;
    if !args.quiet {
        println!("wrote reference artifacts to {}", config.out_dir.display());
    }
    Ok(())
}

fn cmd_solve(args: SolveArgs) -> Result<()> {
    let bundle = load_bundle(&args.bundle)?;
    let instance = build_instance(&bundle)?;
    let y = read_vector_csv(&args.measurements)?;
    if y.len() != instance.projector.rows() {
        bail!(
            "measurements hold {} values but the geometry has {} detector cells",
            y.len(),
            instance.projector.rows()
        );
    }

    let mut scfg = SolverConfig::defaults(
        instance.dictionary.p(),
        instance.opnorm.value,
        parse_mode(&args.mode)?,
        args.k,
    );
    if let Some(mi) = args.max_iters {
        scfg.max_iters = mi;
    }
    if let Some(t) = args.tol {
        scfg.tol = t;
    }

    std::fs::create_dir_all(&args.out_dir)?;
    if args.dump_projector {
        let path = args.out_dir.join("projector.txt");
        let mut buf = Vec::new();
        instance.projector.dump_triplets(&mut buf)?;
        std::fs::write(&path, &buf)?;
        if !args.quiet {
            println!("wrote {}", path.display());
        }
    }

    let sol = solve_projected(&instance.projected, &y, &scfg)?;
    write_vector_csv(&args.out_dir.join("coefficients.csv"), "value", &sol.z)?;
    write_trace_csv(&args.out_dir.join("trace.csv"), &sol.trace)?;
    if !args.quiet {
        println!(
            "solved {} columns in {} iterations ({}), residual {:.6e}; wrote {}",
            instance.dictionary.p(),
            sol.iterations,
            sol.termination,
            sol.residual,
            args.out_dir.join("coefficients.csv").display()
        );
    }
    Ok(())
}

fn cmd_form(args: FormArgs) -> Result<()> {
    let bundle = load_bundle(&args.bundle)?;
    let instance = build_instance(&bundle)?;
    let z = read_vector_csv(&args.coefficients)?;
    let y = read_vector_csv(&args.measurements)?;
    let formed = form_image(&z, &instance.projector, &instance.dictionary, &y, args.k)?;

    std::fs::create_dir_all(&args.out_dir)?;
    write_pgm(&args.out_dir.join("recon.pgm"), &instance.grid, &formed.image)?;
    write_image_csv(&args.out_dir.join("recon.csv"), &instance.grid, &formed.image)?;
    let mut accepted = String::from("rank,column\n");
    for (rank, col) in formed.accepted.iter().enumerate() {
        accepted.push_str(&format!("{rank},{col}\n"));
    }
    std::fs::write(args.out_dir.join("accepted.csv"), accepted)?;
    println!(
        "accepted {} of {} requested shapes, residual {:.6e}; wrote {}",
        formed.accepted.len(),
        args.k,
        formed.residual,
        args.out_dir.join("recon.pgm").display()
    );
    if formed.under_filled(args.k) {
        println!("warning: fewer than K shapes passed the acceptance tests");
    }
    Ok(())
}

fn cmd_project(args: ProjectArgs) -> Result<()> {
    let x = read_vector_csv(&args.input)?;
    let z = match args.set.as_str() {
        "ksimplex" => project_ksimplex(&x, args.k)?,
        "l1ball" => project_l1_ball(&x, args.k),
        other => bail!("unknown set {other:?}; expected \"ksimplex\" or \"l1ball\""),
    };
    if let Some(parent) = args.output.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    write_vector_csv(&args.output, "value", &z)?;
    println!(
        "projected {} entries onto {} (budget {}): sum = {:.12}, l1 = {:.12}",
        z.len(),
        args.set,
        args.k,
        z.iter().sum::<f64>(),
        vecmath::norm1(&z)
    );
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run(args) => cmd_run(args),
        Command::Reference(args) => cmd_reference(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Form(args) => cmd_form(args),
        Command::Project(args) => cmd_project(args),
    }
}
