//! Measurement noise with an exactly calibrated norm.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::vecmath;

/// Add i.i.d. Gaussian noise rescaled so that `‖noise‖ = (level/100)·‖y‖`
/// exactly. `level = 0` returns `y` unchanged without touching the RNG;
/// `y = 0` is degenerate (the target norm is 0) and also returns `y`.
/// Deterministic for a given `(y, level_percent, seed)`.
pub fn add_noise(y: &[f64], level_percent: f64, seed: u64) -> Vec<f64> {
    assert!(
        level_percent >= 0.0 && level_percent.is_finite(),
        "noise level must be a nonnegative percentage"
    );
    if level_percent == 0.0 {
        return y.to_vec();
    }
    let target = level_percent / 100.0 * vecmath::norm(y);
    if target == 0.0 {
        return y.to_vec();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<f64> = (0..y.len())
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    let raw_norm = vecmath::norm(&raw);
    if raw_norm == 0.0 {
        return y.to_vec();
    }
    let scale = target / raw_norm;
    y.iter().zip(&raw).map(|(yi, ni)| yi + scale * ni).collect()
}
