//! Proximal operators and projections used by the primal–dual solver.
//!
//! * [`project_ksimplex`] — Euclidean projection onto
//!   `Δ_p^K = { z : zᵀ1 = K, 0 ≤ z ≤ 1 }`, the coefficient set whose
//!   vertices are exactly the binary vectors with `K` ones.
//! * [`project_l1_ball`] — Euclidean projection onto `{ z : ‖z‖₁ ≤ K }`,
//!   the baseline constraint set.
//! * [`prox_conj_misfit`] — prox of the convex conjugate of
//!   `f(w) = ‖w − y‖`, a shifted projection onto the unit ball; `f*` is
//!   linear on the unit ball, so the prox has the closed form
//!   `(v − γy) / max(1, ‖v − γy‖)`.

use crate::error::{Error, Result};
use crate::vecmath;

/// Stop the simplex root search when `|φ(μ)| ≤ NEWTON_TOL * max(1, K)`.
pub const NEWTON_TOL: f64 = 1e-12;
/// ...or when the root bracket has shrunk below this width.
pub const BRACKET_TOL: f64 = 1e-14;
/// Hard cap on root-search iterations; the bisection fallback halves the
/// bracket every step, so this is never reached in practice.
const MAX_ROOT_ITERS: usize = 200;

/// `φ(μ) = Σ_i clip(x_i − μ, 0, 1) − K` and the count of indices with
/// `0 ≤ x_i − μ ≤ 1` (the negated slope of φ at μ where differentiable).
fn budget_misfit(x: &[f64], mu: f64, k: f64) -> (f64, usize) {
    let mut sum = 0.0;
    let mut active = 0usize;
    for &xi in x {
        let d = xi - mu;
        if d >= 1.0 {
            sum += 1.0;
        } else if d > 0.0 {
            sum += d;
        }
        if (0.0..=1.0).contains(&d) {
            active += 1;
        }
    }
    (sum - k, active)
}

/// Euclidean projection onto `{ z : zᵀ1 = K, 0 ≤ z ≤ 1 }`.
///
/// The projection is the clipped shift `z_i = clip(x_i − μ̄, 0, 1)` where
/// `μ̄` is a root of the non-increasing piecewise-linear `φ` above. The
/// root is found by Newton steps of slope `−|active|`, safeguarded by
/// bisection on the bracket `[min(x) − 1, max(x)]` (where `φ ≥ 0` and
/// `φ ≤ −K` respectively); any Newton step leaving the bracket or landing
/// on a zero-slope plateau falls back to bisection. On flat segments of
/// optimal `μ` all roots give the same projection, so the returned point
/// is unique even when `μ̄` is not.
///
/// Errors with [`Error::InfeasibleBudget`] unless `0 < K ≤ p`.
pub fn project_ksimplex(x: &[f64], k: f64) -> Result<Vec<f64>> {
    let p = x.len();
    if !(k > 0.0 && k.is_finite()) || k > p as f64 {
        return Err(Error::InfeasibleBudget { k, p });
    }
    if !vecmath::all_finite(x) {
        return Err(Error::NonFiniteInput("projection input"));
    }
    // K = p admits the single feasible point 1; return it exactly.
    if k == p as f64 {
        return Ok(vec![1.0; p]);
    }

    let xmin = x.iter().cloned().fold(f64::INFINITY, f64::min);
    let xmax = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut lo = xmin - 1.0;
    let mut hi = xmax;
    debug_assert!(budget_misfit(x, lo, k).0 >= 0.0);
    debug_assert!(budget_misfit(x, hi, k).0 <= 0.0);

    let tol = NEWTON_TOL * k.max(1.0);
    let mut mu = 0.5 * (lo + hi);
    for _ in 0..MAX_ROOT_ITERS {
        let (phi, active) = budget_misfit(x, mu, k);
        if phi.abs() <= tol {
            break;
        }
        // Maintain the bracket: φ is non-increasing.
        if phi > 0.0 {
            lo = mu;
        } else {
            hi = mu;
        }
        if hi - lo <= BRACKET_TOL {
            break;
        }
        let newton = if active > 0 {
            mu + phi / active as f64
        } else {
            f64::NAN
        };
        mu = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }

    let z: Vec<f64> = x.iter().map(|&xi| (xi - mu).clamp(0.0, 1.0)).collect();
    debug_assert!((z.iter().sum::<f64>() - k).abs() <= 1e-10 * k.max(1.0));
    Ok(z)
}

/// Euclidean projection onto the `ℓ1` ball `{ z : ‖z‖₁ ≤ K }` by
/// sort-and-threshold soft shrinkage. Points already inside the ball are
/// returned unchanged. `K` must be positive (checked by assertion; the
/// solver and CLI validate budgets before calling).
pub fn project_l1_ball(x: &[f64], k: f64) -> Vec<f64> {
    assert!(k > 0.0 && k.is_finite(), "l1 budget must be positive");
    if vecmath::norm1(x) <= k {
        return x.to_vec();
    }
    // Find the shrinkage threshold λ > 0 with Σ max(|x_i| − λ, 0) = K.
    let mut mags: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    mags.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumsum = 0.0;
    let mut lambda = 0.0;
    for (j, &u) in mags.iter().enumerate() {
        cumsum += u;
        let candidate = (cumsum - k) / (j as f64 + 1.0);
        if u - candidate > 0.0 {
            lambda = candidate;
        } else {
            break;
        }
    }
    x.iter()
        .map(|&v| v.signum() * (v.abs() - lambda).max(0.0))
        .collect()
}

/// Prox of the conjugate of the misfit `f(w) = ‖w − y‖`:
/// `prox_{γf*}(v) = (v − γy) / max(1, ‖v − γy‖)`.
pub fn prox_conj_misfit(v: &[f64], gamma: f64, y: &[f64]) -> Result<Vec<f64>> {
    if v.len() != y.len() {
        return Err(Error::DimensionMismatch {
            context: "prox_conj_misfit",
            expected: y.len(),
            got: v.len(),
        });
    }
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "prox step size must be nonnegative, got {gamma}"
        )));
    }
    let mut w: Vec<f64> = v.iter().zip(y).map(|(vi, yi)| vi - gamma * yi).collect();
    let n = vecmath::norm(&w);
    if n > 1.0 {
        for wi in w.iter_mut() {
            *wi /= n;
        }
    }
    Ok(w)
}
