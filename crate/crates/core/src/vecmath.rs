//! Small dense-vector helpers shared by the solver, the prox operators,
//! and the test oracles. All reductions are sequential left folds, so the
//! results are bit-deterministic for a given input order.

/// Euclidean inner product.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean norm.
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Euclidean distance `‖a − b‖`.
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// `out += c * a`.
pub fn axpy(c: f64, a: &[f64], out: &mut [f64]) {
    debug_assert_eq!(a.len(), out.len());
    for (o, x) in out.iter_mut().zip(a) {
        *o += c * x;
    }
}

/// Sum of absolute values.
pub fn norm1(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).sum()
}

/// True when every entry is finite.
pub fn all_finite(a: &[f64]) -> bool {
    a.iter().all(|x| x.is_finite())
}

/// Relative Euclidean error `‖a − b‖ / ‖b‖` (absolute error when `b = 0`).
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let nb = norm(b);
    if nb == 0.0 {
        norm(a)
    } else {
        distance(a, b) / nb
    }
}
