//! Success judgement for reconstructions.

use crate::vecmath;

/// A reconstruction succeeds when its relative Euclidean error
/// `‖x̄ − x_true‖ / ‖x_true‖` is at most `tol`. A zero ground truth is
/// matched only by an exactly zero reconstruction.
pub fn judge_success(x: &[f64], x_true: &[f64], tol: f64) -> bool {
    debug_assert_eq!(x.len(), x_true.len());
    let nt = vecmath::norm(x_true);
    if nt == 0.0 {
        return vecmath::norm(x) == 0.0;
    }
    vecmath::distance(x, x_true) / nt <= tol
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_match_succeeds() {
        let x = vec![1.0, 2.0, 0.0];
        assert!(judge_success(&x, &x, 1e-3));
    }

    #[test]
    fn error_just_inside_and_outside_threshold() {
        let x_true = vec![1.0, 0.0, 0.0, 0.0];
        let inside = vec![1.0 + 0.9e-3, 0.0, 0.0, 0.0];
        let outside = vec![1.0 + 1.1e-3, 0.0, 0.0, 0.0];
        assert!(judge_success(&inside, &x_true, 1e-3));
        assert!(!judge_success(&outside, &x_true, 1e-3));
    }

    #[test]
    fn zero_truth_requires_zero_reconstruction() {
        let zero = vec![0.0; 3];
        assert!(judge_success(&zero, &zero, 1e-3));
        assert!(!judge_success(&[1e-9, 0.0, 0.0], &zero, 1e-3));
    }
}
