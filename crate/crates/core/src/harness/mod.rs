//! Config-driven experiment harness: seeded phantom → projection → noise →
//! solve → formation → judgement pipelines, success-rate sweeps, and the
//! side-by-side two-mode reference case. All artifacts (CSV, PGM, JSON
//! manifest) are pure functions of `(config, seed)`; wall-clock timings go
//! to a separate, explicitly non-deterministic file.

pub mod config;
pub mod instance;
pub mod judge;
pub mod noise;
pub mod reference;
pub mod sweep;

pub use config::{
    DictionarySpec, ExperimentConfig, PhantomDraw, ProblemBundle, RotationSpec, SolverSpec,
    SweepSpec, SweepVariable,
};
pub use instance::{build_instance, Instance};
pub use judge::judge_success;
pub use noise::add_noise;
pub use reference::{reference_config, run_reference_case, ModeOutcome, ReferenceReport};
pub use sweep::{run_sweep, SweepReport, SweepRow, TrialRecord};

/// Salt XORed into the per-trial seed to derive the noise stream, so the
/// phantom draw and the noise draw never share a generator state.
pub const NOISE_SEED_SALT: u64 = 0x9e37_79b9_7f4a_7c15;
