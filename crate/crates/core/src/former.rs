//! Greedy image formation: snap relaxed coefficients to binary columns.
//!
//! The solver returns a point of the convex constraint set; the image is
//! promised to be a sum of `K` non-overlapping dictionary columns. The
//! former scans columns in order of decreasing coefficient (ties broken
//! by ascending index, stably) and accepts a column only if (a) adding it
//! does not increase the measurement residual and (b) its support does not
//! overlap what has already been placed. The scan stops after `K`
//! acceptances or when the candidate list is exhausted — the budget caps
//! accepted shapes, so later columns are never revisited after the `K`-th
//! acceptance even if some earlier candidate was rejected.

use crate::dictionary::Dictionary;
use crate::error::{Error, Result};
use crate::projector::SparseProjector;
use crate::vecmath;

/// Overlap-test scale: a candidate is "disjoint enough" when
/// `x̄ᵀ(Ψ e_j) ≤ OVERLAP_TOL_SCALE · ‖Ψ e_j‖ · ‖x̄‖`. Exactly disjoint
/// supports give an inner product of exactly zero (no terms are shared),
/// so this only tolerates floating-point dust from near-misses.
pub const OVERLAP_TOL_SCALE: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct FormationResult {
    /// Formed image `x̄` (a sum of accepted columns).
    pub image: Vec<f64>,
    /// Accepted column indices in acceptance order.
    pub accepted: Vec<usize>,
    /// Final measurement residual `‖A x̄ − y‖`.
    pub residual: f64,
}

impl FormationResult {
    /// True when fewer than the budgeted `k` columns were accepted.
    pub fn under_filled(&self, k: usize) -> bool {
        self.accepted.len() < k
    }
}

/// Greedily form an image from solver coefficients `z`.
///
/// `k` is the shape budget; the result may hold fewer columns when the
/// candidates cannot pass the residual/overlap tests (under-filled results
/// are returned, not errors — the caller decides whether that is failure).
pub fn form_image(
    z: &[f64],
    a: &SparseProjector,
    psi: &Dictionary,
    y: &[f64],
    k: usize,
) -> Result<FormationResult> {
    let p = psi.p();
    if z.len() != p {
        return Err(Error::DimensionMismatch {
            context: "formation coefficients",
            expected: p,
            got: z.len(),
        });
    }
    if y.len() != a.rows() {
        return Err(Error::DimensionMismatch {
            context: "formation measurements",
            expected: a.rows(),
            got: y.len(),
        });
    }
    if a.cols() != psi.n() {
        return Err(Error::DimensionMismatch {
            context: "formation projector/dictionary",
            expected: a.cols(),
            got: psi.n(),
        });
    }
    if k == 0 || k > p {
        return Err(Error::InfeasibleBudget { k: k as f64, p });
    }
    if !vecmath::all_finite(z) {
        return Err(Error::NonFiniteInput("formation coefficients"));
    }

    // Stable order: coefficient descending, index ascending on ties.
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&i, &j| z[j].partial_cmp(&z[i]).unwrap().then(i.cmp(&j)));

    // Column access to A for projecting single dictionary columns.
    let (col_ptr, row_idx, vals) = a.to_csc();
    let m = a.rows();

    let mut x = vec![0.0; psi.n()];
    let mut x_norm = 0.0f64;
    let mut r: Vec<f64> = y.iter().map(|yi| -yi).collect(); // A x̄ − y
    let mut res = vecmath::norm(&r);
    let mut accepted = Vec::new();
    let mut proj = vec![0.0; m];

    for &j in &order {
        if accepted.len() >= k {
            break;
        }
        let col = psi.column(j);

        // Overlap test first (cheap, sparse).
        let overlap = col.dot(&x);
        if overlap > OVERLAP_TOL_SCALE * col.norm() * x_norm {
            continue;
        }

        // Candidate residual ‖A(x̄ + ψ_j) − y‖.
        proj.fill(0.0);
        for (&px, &v) in col.indices.iter().zip(&col.values) {
            for t in col_ptr[px]..col_ptr[px + 1] {
                proj[row_idx[t]] += vals[t] * v;
            }
        }
        let mut cand_sq = 0.0;
        for i in 0..m {
            let ri = r[i] + proj[i];
            cand_sq += ri * ri;
        }
        let cand = cand_sq.sqrt();
        if cand <= res {
            col.add_into(1.0, &mut x);
            for i in 0..m {
                r[i] += proj[i];
            }
            res = cand;
            x_norm = vecmath::norm(&x);
            accepted.push(j);
        }
    }

    Ok(FormationResult {
        image: x,
        accepted,
        residual: res,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionary::{build_dictionary, TranslationLattice};
    use crate::grid::ImageGrid;
    use crate::projector::{build_fan_projector, FanBeamGeometry};
    use crate::shapes::ShapeSpec;

    fn instance(centers: Vec<[f64; 2]>) -> (SparseProjector, Dictionary) {
        let grid = ImageGrid::new(1.0, 1.0, 16, 16).unwrap();
        let geom =
            FanBeamGeometry::new([-1.5, 0.0], [1.5, 0.0], [0.0, 1.0], 3.2, 32).unwrap();
        let a = build_fan_projector(&grid, &geom).unwrap();
        let dict = build_dictionary(
            &[ShapeSpec::Disc {
                radius: 0.1,
                intensity: 1.0,
            }],
            &TranslationLattice::Explicit(centers),
            &[0.0],
            &grid,
        )
        .unwrap();
        (a, dict)
    }

    #[test]
    fn two_columns_k1_picks_the_larger_coefficient() {
        let (a, dict) = instance(vec![[-0.25, 0.0], [0.25, 0.0]]);
        let y = a.apply(&dict.synthesize(&[1.0, 0.0]).unwrap()).unwrap();
        let out = form_image(&[0.9, 0.1], &a, &dict, &y, 1).unwrap();
        assert_eq!(out.accepted, vec![0]);
        assert!(out.residual < 1e-12, "residual {}", out.residual);
        assert_eq!(out.image, dict.synthesize(&[1.0, 0.0]).unwrap());
    }

    #[test]
    fn overlapping_runner_up_is_rejected() {
        // Columns 0 and 1 overlap; 2 is disjoint. True image = 0 + 2.
        let (a, dict) = instance(vec![[-0.25, 0.0], [-0.2, 0.0], [0.25, 0.0]]);
        let y = a
            .apply(&dict.synthesize(&[1.0, 0.0, 1.0]).unwrap())
            .unwrap();
        // Coefficients rank the overlapping impostor second.
        let out = form_image(&[0.8, 0.5, 0.4], &a, &dict, &y, 2).unwrap();
        assert_eq!(out.accepted, vec![0, 2]);
        assert!(out.residual < 1e-12);
    }

    #[test]
    fn ties_break_by_ascending_index() {
        let (a, dict) = instance(vec![[-0.25, 0.0], [0.25, 0.0]]);
        let y = a.apply(&dict.synthesize(&[1.0, 0.0]).unwrap()).unwrap();
        // Equal coefficients: index 0 is scanned first and explains y.
        let out = form_image(&[0.5, 0.5], &a, &dict, &y, 1).unwrap();
        assert_eq!(out.accepted, vec![0]);
    }

    #[test]
    fn residual_increase_is_rejected_leaving_underfilled() {
        let (a, dict) = instance(vec![[-0.25, 0.0], [0.25, 0.0]]);
        // y explains column 0 only; budget asks for two shapes.
        let y = a.apply(&dict.synthesize(&[1.0, 0.0]).unwrap()).unwrap();
        let out = form_image(&[0.9, 0.6], &a, &dict, &y, 2).unwrap();
        assert_eq!(out.accepted, vec![0]);
        assert!(out.under_filled(2));
    }

    #[test]
    fn zero_coefficients_accept_first_column_only_if_harmless() {
        let (a, dict) = instance(vec![[-0.25, 0.0], [0.25, 0.0]]);
        let y = vec![0.0; a.rows()];
        // Any added column strictly increases the residual from 0.
        let out = form_image(&[0.0, 0.0], &a, &dict, &y, 1).unwrap();
        assert!(out.accepted.is_empty());
        assert_eq!(out.residual, 0.0);
    }

    #[test]
    fn budget_validation() {
        let (a, dict) = instance(vec![[-0.25, 0.0], [0.25, 0.0]]);
        let y = vec![0.0; a.rows()];
        assert!(matches!(
            form_image(&[0.0, 0.0], &a, &dict, &y, 0),
            Err(Error::InfeasibleBudget { .. })
        ));
        assert!(matches!(
            form_image(&[0.0, 0.0], &a, &dict, &y, 3),
            Err(Error::InfeasibleBudget { .. })
        ));
        assert!(form_image(&[0.0; 3], &a, &dict, &y, 1).is_err()); // bad z len
    }
}
