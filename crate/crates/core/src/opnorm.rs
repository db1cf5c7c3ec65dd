//! Operator-norm estimation by power iteration.
//!
//! The primal–dual step sizes require `‖AΨ‖ = σ_max(AΨ)`. Power iteration
//! on the Gram map `v ↦ (AΨ)ᵀ(AΨ)v` needs only forward and transpose
//! applications, so it works for any [`LinearOperator`] without
//! materializing a dense matrix.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Minimal interface shared by the projector, the dictionary, and their
/// composition: matrix-vector products with the operator and its
/// transpose. Implementations must not read `out`'s prior contents.
pub trait LinearOperator {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    /// `out = M x` with `x.len() == cols()`, `out.len() == rows()`.
    fn apply(&self, x: &[f64], out: &mut [f64]);
    /// `out = Mᵀ u` with `u.len() == rows()`, `out.len() == cols()`.
    fn apply_transpose(&self, u: &[f64], out: &mut [f64]);
}

/// Iteration cap for [`operator_norm`].
pub const OPNORM_MAX_ITERS: usize = 500;
/// Relative tolerance on successive singular-value estimates.
pub const OPNORM_REL_TOL: f64 = 1e-6;
/// Fixed seed for the random start vector, so estimates are reproducible.
pub const OPNORM_SEED: u64 = 0x5eed_0f0d;

/// Largest-singular-value estimate with convergence diagnostics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OperatorNorm {
    /// Estimated `σ_max`.
    pub value: f64,
    /// Power iterations performed.
    pub iterations: usize,
    /// False when the iteration cap was hit before the relative change of
    /// the estimate dropped below tolerance; `value` is then the best
    /// available (lower-biased) estimate.
    pub converged: bool,
}

/// Estimate `σ_max(M)` by power iteration on `MᵀM` from a seeded random
/// start vector. Deterministic for a given operator.
pub fn operator_norm<O: LinearOperator>(op: &O) -> OperatorNorm {
    let (m, p) = (op.rows(), op.cols());
    let mut rng = ChaCha8Rng::seed_from_u64(OPNORM_SEED);
    let mut v: Vec<f64> = (0..p).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut w = vec![0.0; m];
    let mut s = vec![0.0; p];

    let mut sigma = 0.0f64;
    for it in 1..=OPNORM_MAX_ITERS {
        let nv = crate::vecmath::norm(&v);
        if nv == 0.0 {
            // Start vector (or iterate) fell in the kernel; resample once,
            // then concede a zero operator.
            let resampled: Vec<f64> = (0..p).map(|_| rng.random_range(-1.0..1.0)).collect();
            if crate::vecmath::norm(&resampled) == 0.0 || it > 1 {
                return OperatorNorm {
                    value: 0.0,
                    iterations: it,
                    converged: true,
                };
            }
            v = resampled;
            continue;
        }
        for x in v.iter_mut() {
            *x /= nv;
        }
        op.apply(&v, &mut w);
        let next = crate::vecmath::norm(&w);
        op.apply_transpose(&w, &mut s);
        std::mem::swap(&mut v, &mut s);

        let change = (next - sigma).abs();
        sigma = next;
        if it > 1 && change <= OPNORM_REL_TOL * sigma.max(f64::MIN_POSITIVE) {
            return OperatorNorm {
                value: sigma,
                iterations: it,
                converged: true,
            };
        }
    }
    OperatorNorm {
        value: sigma,
        iterations: OPNORM_MAX_ITERS,
        converged: false,
    }
}
