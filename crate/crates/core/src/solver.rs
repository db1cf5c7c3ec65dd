//! Primal–dual solver for the constrained misfit program
//!
//! ```text
//! min_z ‖AΨz − y‖   s.t.   z ∈ C,
//! ```
//!
//! where `C` is either the budgeted box `{ zᵀ1 = K, 0 ≤ z ≤ 1 }` (whose
//! vertices are the binary K-sparse codes — the shape-recovery mode) or
//! the `ℓ1` ball `{ ‖z‖₁ ≤ K }` (the sparse-coding baseline; same misfit,
//! only the projection differs).
//!
//! Iterates, with `B = AΨ` and `g = indicator of C`, `f = ‖· − y‖`:
//!
//! ```text
//! z_{t+1} = prox_{γg}(z_t − γ Bᵀ u_t)          (projection onto C)
//! u_{t+1} = prox_{τf*}(u_t − τ B(z_t − 2 z_{t+1}))
//! ```
//!
//! and the loop stops early once `‖B z_t − y‖ ≤ ε` (returning `z_{t+1}`),
//! else after `T` iterations (returning the last primal iterate). Note
//! `−(z_t − 2z_{t+1}) = 2z_{t+1} − z_t`, the usual primal extrapolation,
//! so the standard step-size condition `γτ‖B‖² ≤ 1` applies; the default
//! steps `γ = 1.2/‖B‖`, `τ = 0.8/‖B‖` give `γτ‖B‖² = 0.96`.

use serde::{Deserialize, Serialize};

use crate::dictionary::Dictionary;
use crate::error::{Error, Result};
use crate::opnorm::LinearOperator;
use crate::projector::SparseProjector;
use crate::prox::{project_ksimplex, project_l1_ball, prox_conj_misfit};
use crate::vecmath;

/// Which constraint set the primal projection uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintMode {
    /// Budgeted box `zᵀ1 = K, 0 ≤ z ≤ 1`.
    Cosharp,
    /// `ℓ1` ball `‖z‖₁ ≤ K`.
    Ssc,
}

impl std::fmt::Display for ConstraintMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConstraintMode::Cosharp => write!(f, "cosharp"),
            ConstraintMode::Ssc => write!(f, "ssc"),
        }
    }
}

/// Solver parameters. Build with [`SolverConfig::defaults`] and override
/// fields as needed.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolverConfig {
    pub mode: ConstraintMode,
    /// Shape budget `K`.
    pub budget: f64,
    /// Primal step `γ`.
    pub gamma: f64,
    /// Dual step `τ`.
    pub tau: f64,
    /// Iteration cap `T`.
    pub max_iters: usize,
    /// Residual tolerance `ε` for early stopping.
    pub tol: f64,
    /// Primal start; `None` = the budget barycenter `(K/p)·1`.
    pub z0: Option<Vec<f64>>,
    /// Dual start; `None` = zeros.
    pub u0: Option<Vec<f64>>,
}

impl SolverConfig {
    /// Default parameters for a `p`-column problem whose composed operator
    /// has norm `opnorm`: `γ = 1.2/opnorm`, `τ = 0.8/opnorm`, `T = 4p²`,
    /// `ε = 1e-6`, barycenter/zero starts.
    pub fn defaults(p: usize, opnorm: f64, mode: ConstraintMode, budget: f64) -> Self {
        let sigma = 1.0 / opnorm;
        Self {
            mode,
            budget,
            gamma: 1.2 * sigma,
            tau: 0.8 * sigma,
            max_iters: 4 * p * p,
            tol: 1e-6,
            z0: None,
            u0: None,
        }
    }

    pub fn validate(&self, p: usize, m: usize) -> Result<()> {
        if !(self.budget > 0.0 && self.budget.is_finite()) || self.budget > p as f64 {
            return Err(Error::InfeasibleBudget {
                k: self.budget,
                p,
            });
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) || !(self.tau > 0.0 && self.tau.is_finite())
        {
            return Err(Error::InvalidConfig(format!(
                "step sizes must be positive and finite, got gamma={} tau={}",
                self.gamma, self.tau
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be >= 1".into()));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "tolerance must be nonnegative, got {}",
                self.tol
            )));
        }
        if let Some(z0) = &self.z0 {
            if z0.len() != p {
                return Err(Error::DimensionMismatch {
                    context: "solver z0",
                    expected: p,
                    got: z0.len(),
                });
            }
        }
        if let Some(u0) = &self.u0 {
            if u0.len() != m {
                return Err(Error::DimensionMismatch {
                    context: "solver u0",
                    expected: m,
                    got: u0.len(),
                });
            }
        }
        Ok(())
    }
}

/// Why the iteration stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// `‖AΨz − y‖ ≤ ε` was reached.
    Tolerance,
    /// The iteration cap was exhausted.
    MaxIters,
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Termination::Tolerance => write!(f, "tolerance"),
            Termination::MaxIters => write!(f, "max_iters"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolverResult {
    /// Final coefficient iterate `z̄`.
    pub z: Vec<f64>,
    /// Iterations performed (= length of `trace`).
    pub iterations: usize,
    /// Final residual `‖AΨz̄ − y‖`.
    pub residual: f64,
    /// Residual `‖AΨz_t − y‖` per iteration.
    pub trace: Vec<f64>,
    pub termination: Termination,
}

/// The composed operator `B = AΨ`, materialized column-by-column
/// (`B e_k = A ψ_k`) because the solver touches it twice per iteration and
/// the formed matrix is small (`m × p` dense, column-major).
#[derive(Clone, Debug)]
pub struct ProjectedDictionary {
    m: usize,
    p: usize,
    cols: Vec<f64>,
}

impl ProjectedDictionary {
    pub fn new(a: &SparseProjector, psi: &Dictionary) -> Result<Self> {
        if a.cols() != psi.n() {
            return Err(Error::DimensionMismatch {
                context: "projector/dictionary composition",
                expected: a.cols(),
                got: psi.n(),
            });
        }
        let m = a.rows();
        let p = psi.p();
        let (col_ptr, row_idx, vals) = a.to_csc();
        let mut cols = vec![0.0; m * p];
        for k in 0..p {
            let out = &mut cols[k * m..(k + 1) * m];
            let col = psi.column(k);
            for (&j, &v) in col.indices.iter().zip(&col.values) {
                for t in col_ptr[j]..col_ptr[j + 1] {
                    out[row_idx[t]] += vals[t] * v;
                }
            }
        }
        Ok(Self { m, p, cols })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Column `B e_k` (the projected k-th dictionary atom).
    pub fn column(&self, k: usize) -> &[f64] {
        &self.cols[k * self.m..(k + 1) * self.m]
    }
}

impl LinearOperator for ProjectedDictionary {
    fn rows(&self) -> usize {
        self.m
    }

    fn cols(&self) -> usize {
        self.p
    }

    fn apply(&self, z: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for k in 0..self.p {
            if z[k] != 0.0 {
                vecmath::axpy(z[k], self.column(k), out);
            }
        }
    }

    fn apply_transpose(&self, u: &[f64], out: &mut [f64]) {
        for k in 0..self.p {
            out[k] = vecmath::dot(self.column(k), u);
        }
    }
}

/// Convenience wrapper composing `A` and `Ψ` before calling
/// [`solve_projected`].
pub fn solve(
    a: &SparseProjector,
    psi: &Dictionary,
    y: &[f64],
    config: &SolverConfig,
) -> Result<SolverResult> {
    let b = ProjectedDictionary::new(a, psi)?;
    solve_projected(&b, y, config)
}

/// Run the primal–dual iteration on a pre-composed operator `B = AΨ`.
pub fn solve_projected(
    b: &ProjectedDictionary,
    y: &[f64],
    config: &SolverConfig,
) -> Result<SolverResult> {
    let (m, p) = (b.m(), b.p());
    if y.len() != m {
        return Err(Error::DimensionMismatch {
            context: "solver measurements",
            expected: m,
            got: y.len(),
        });
    }
    if !vecmath::all_finite(y) {
        return Err(Error::NonFiniteInput("measurements"));
    }
    config.validate(p, m)?;
    let k = config.budget;

    let mut z: Vec<f64> = match &config.z0 {
        Some(z0) => z0.clone(),
        None => vec![k / p as f64; p],
    };
    let mut u: Vec<f64> = match &config.u0 {
        Some(u0) => u0.clone(),
        None => vec![0.0; m],
    };

    let mut w = vec![0.0; m]; // B z_t
    let mut w_next = vec![0.0; m]; // B z_{t+1}
    let mut grad = vec![0.0; p]; // Bᵀ u_t
    let mut z_in = vec![0.0; p];
    let mut u_in = vec![0.0; m];
    b.apply(&z, &mut w);

    let mut trace = Vec::new();
    let mut termination = Termination::MaxIters;

    for t in 0..config.max_iters {
        // Primal step: project z_t − γ Bᵀ u_t onto the constraint set.
        b.apply_transpose(&u, &mut grad);
        for i in 0..p {
            z_in[i] = z[i] - config.gamma * grad[i];
        }
        let z_next = match config.mode {
            ConstraintMode::Cosharp => project_ksimplex(&z_in, k)?,
            ConstraintMode::Ssc => project_l1_ball(&z_in, k),
        };
        b.apply(&z_next, &mut w_next);

        // Dual step on the extrapolated point.
        for i in 0..m {
            u_in[i] = u[i] - config.tau * (w[i] - 2.0 * w_next[i]);
        }
        let u_next = prox_conj_misfit(&u_in, config.tau, y)?;

        if !(vecmath::all_finite(&z_next) && vecmath::all_finite(&u_next)) {
            return Err(Error::NonFiniteIterate {
                iteration: t,
                trace,
            });
        }

        // Early stop tests the residual of z_t (already computed as w),
        // and returns the fresher z_{t+1}.
        let res_t = vecmath::distance(&w, y);
        trace.push(res_t);
        z = z_next;
        std::mem::swap(&mut w, &mut w_next);
        u = u_next;
        if res_t <= config.tol {
            termination = Termination::Tolerance;
            break;
        }
    }

    let residual = vecmath::distance(&w, y);
    Ok(SolverResult {
        iterations: trace.len(),
        residual,
        z,
        trace,
        termination,
    })
}
