//! Independent oracles for the integration suites.
//!
//! Everything here is deliberately implemented by a different route than
//! the library code it checks: projections by exhaustive active-set /
//! support enumeration or projected gradient, chord lengths by
//! Liang–Barsky parametric clipping, operator norms by dense SVD, and the
//! recovery pipeline by brute-force enumeration of all binary supports.

#![allow(dead_code)]

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use cosharp::dictionary::{build_dictionary, Dictionary, TranslationLattice};
use cosharp::grid::ImageGrid;
use cosharp::opnorm::LinearOperator;
use cosharp::projector::{build_fan_projector, FanBeamGeometry, SparseProjector};
use cosharp::shapes::ShapeSpec;

// ---------------------------------------------------------------------
// Dense views of linear operators
// ---------------------------------------------------------------------

/// Materialize any operator as a dense row-major matrix by applying it to
/// unit vectors.
pub fn dense_matrix<O: LinearOperator>(op: &O) -> Vec<Vec<f64>> {
    let (m, n) = (op.rows(), op.cols());
    let mut cols = vec![vec![0.0; m]; n];
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        op.apply(&e, &mut cols[j]);
        e[j] = 0.0;
    }
    let mut rows = vec![vec![0.0; n]; m];
    for (j, col) in cols.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            rows[i][j] = v;
        }
    }
    rows
}

/// Largest singular value of a dense row-major matrix (nalgebra SVD).
pub fn svd_opnorm(rows: &[Vec<f64>]) -> f64 {
    let m = rows.len();
    let n = if m == 0 { 0 } else { rows[0].len() };
    let mat = nalgebra::DMatrix::from_fn(m, n, |i, j| rows[i][j]);
    mat.svd(false, false).singular_values.max()
}

// ---------------------------------------------------------------------
// Projection oracles
// ---------------------------------------------------------------------

/// Exhaustive projection onto `{z : 0 ≤ z ≤ 1, Σz = K}`: enumerate all
/// 3^p assignments of coordinates to {at 0, interior, at 1}, solve the
/// interior multiplier in closed form, and keep the feasible candidate
/// closest to `x`. The true projection's active set is among the
/// candidates, and every candidate is feasible by construction, so the
/// minimum-distance candidate is the projection.
pub fn oracle_ksimplex(x: &[f64], k: f64) -> Vec<f64> {
    let p = x.len();
    assert!(p <= 12, "3^p enumeration oracle is for tiny p only");
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut assignment = vec![0u8; p]; // 0 = at 0, 1 = interior, 2 = at 1
    let total = 3usize.pow(p as u32);
    for code in 0..total {
        let mut c = code;
        for a in assignment.iter_mut() {
            *a = (c % 3) as u8;
            c /= 3;
        }
        let interior: Vec<usize> = (0..p).filter(|&i| assignment[i] == 1).collect();
        let uppers = (0..p).filter(|&i| assignment[i] == 2).count();
        let mut z = vec![0.0; p];
        if interior.is_empty() {
            if (uppers as f64 - k).abs() > 1e-9 {
                continue;
            }
        } else {
            let sum_interior: f64 = interior.iter().map(|&i| x[i]).sum();
            let mu = (sum_interior + uppers as f64 - k) / interior.len() as f64;
            let mut feasible = true;
            for &i in &interior {
                let v = x[i] - mu;
                if !(-1e-12..=1.0 + 1e-12).contains(&v) {
                    feasible = false;
                    break;
                }
                z[i] = v.clamp(0.0, 1.0);
            }
            if !feasible {
                continue;
            }
        }
        for i in 0..p {
            if assignment[i] == 2 {
                z[i] = 1.0;
            }
        }
        let sum: f64 = z.iter().sum();
        if (sum - k).abs() > 1e-9 {
            continue;
        }
        let d2: f64 = z.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
        if best.as_ref().map_or(true, |(bd, _)| d2 < *bd) {
            best = Some((d2, z));
        }
    }
    best.expect("no feasible candidate; is 0 < K ≤ p?").1
}

/// Exhaustive projection onto `{z : ‖z‖₁ ≤ K}`: if `x` is inside, it is
/// its own projection; otherwise enumerate all 2^p supports, solve the
/// boundary multiplier on each, and keep the feasible candidate closest
/// to `x`.
pub fn oracle_l1_ball(x: &[f64], k: f64) -> Vec<f64> {
    let p = x.len();
    assert!(p <= 16, "2^p enumeration oracle is for tiny p only");
    let l1: f64 = x.iter().map(|v| v.abs()).sum();
    if l1 <= k {
        return x.to_vec();
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1usize..(1 << p) {
        let support: Vec<usize> = (0..p).filter(|&i| mask & (1 << i) != 0).collect();
        let sum_abs: f64 = support.iter().map(|&i| x[i].abs()).sum();
        let lambda = (sum_abs - k) / support.len() as f64;
        if lambda < -1e-12 {
            continue;
        }
        let mut z = vec![0.0; p];
        let mut feasible = true;
        for &i in &support {
            let v = x[i].abs() - lambda;
            if v < -1e-12 {
                feasible = false;
                break;
            }
            z[i] = x[i].signum() * v.max(0.0);
        }
        if !feasible {
            continue;
        }
        let d2: f64 = z.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
        if best.as_ref().map_or(true, |(bd, _)| d2 < *bd) {
            best = Some((d2, z));
        }
    }
    best.expect("boundary projection must exist").1
}

/// Numeric prox oracle for `γ · (sup-norm conjugate of ‖· − y‖)`: solves
/// `min_u ½‖u − v‖² + γ⟨u, y⟩ s.t. ‖u‖ ≤ 1` by projected gradient with a
/// fixed step, iterated to a 1e-13 fixed-point change.
pub fn oracle_prox_conj_misfit(v: &[f64], gamma: f64, y: &[f64]) -> Vec<f64> {
    let project_ball = |u: &mut Vec<f64>| {
        let n: f64 = u.iter().map(|a| a * a).sum::<f64>().sqrt();
        if n > 1.0 {
            for a in u.iter_mut() {
                *a /= n;
            }
        }
    };
    let mut u = vec![0.0; v.len()];
    let step = 0.5;
    for _ in 0..200_000 {
        let mut next: Vec<f64> = u
            .iter()
            .zip(v.iter().zip(y))
            .map(|(&ui, (&vi, &yi))| ui - step * (ui - vi + gamma * yi))
            .collect();
        project_ball(&mut next);
        let delta: f64 = next
            .iter()
            .zip(&u)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        u = next;
        if delta <= 1e-13 {
            break;
        }
    }
    u
}

// ---------------------------------------------------------------------
// Geometry oracle
// ---------------------------------------------------------------------

/// Chord length of the ray `s + t·d (t ≥ 0)` through an axis-aligned
/// rectangle, by Liang–Barsky parametric clipping. Returns 0 for misses
/// and for rays that only graze a boundary.
pub fn chord_length_liang_barsky(
    s: [f64; 2],
    d: [f64; 2],
    x_range: (f64, f64),
    y_range: (f64, f64),
) -> f64 {
    let mut t0: f64 = 0.0;
    let mut t1: f64 = f64::INFINITY;
    let p = [-d[0], d[0], -d[1], d[1]];
    let q = [
        s[0] - x_range.0,
        x_range.1 - s[0],
        s[1] - y_range.0,
        y_range.1 - s[1],
    ];
    for i in 0..4 {
        if p[i] == 0.0 {
            if q[i] < 0.0 {
                return 0.0;
            }
        } else {
            let r = q[i] / p[i];
            if p[i] < 0.0 {
                t0 = t0.max(r);
            } else {
                t1 = t1.min(r);
            }
        }
    }
    if t1 <= t0 {
        return 0.0;
    }
    (t1 - t0) * (d[0] * d[0] + d[1] * d[1]).sqrt()
}

// ---------------------------------------------------------------------
// Brute-force recovery oracle
// ---------------------------------------------------------------------

/// Project every dictionary column through `a`, giving dense measurement
/// columns.
pub fn projected_columns(a: &SparseProjector, psi: &Dictionary) -> Vec<Vec<f64>> {
    (0..psi.p())
        .map(|j| {
            let mut x = vec![0.0; psi.n()];
            psi.column(j).add_into(1.0, &mut x);
            a.apply(&x).expect("dimensions agree")
        })
        .collect()
}

/// Globally optimal binary-support residual: enumerate all C(p, K)
/// supports of size exactly `k` and return the smallest `‖Σ_S b_j − y‖`
/// together with the minimizing support.
pub fn best_binary_support(b_cols: &[Vec<f64>], y: &[f64], k: usize) -> (f64, Vec<usize>) {
    let p = b_cols.len();
    assert!(k >= 1 && k <= p);
    let mut support: Vec<usize> = (0..k).collect();
    let mut best_res = f64::INFINITY;
    let mut best_support = support.clone();
    loop {
        let mut r = vec![0.0; y.len()];
        for &j in &support {
            for (i, v) in b_cols[j].iter().enumerate() {
                r[i] += v;
            }
        }
        let res: f64 = r
            .iter()
            .zip(y)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        if res < best_res {
            best_res = res;
            best_support = support.clone();
        }
        // Next k-combination in lexicographic order.
        let mut i = k;
        loop {
            if i == 0 {
                return (best_res, best_support);
            }
            i -= 1;
            if support[i] != i + p - k {
                break;
            }
        }
        support[i] += 1;
        for j in i + 1..k {
            support[j] = support[j - 1] + 1;
        }
    }
}

// ---------------------------------------------------------------------
// Random instance builders
// ---------------------------------------------------------------------

/// Standard desk geometry: source 1.5 m left, detector plane 1.5 m right
/// of a unit-square domain, detector long enough to cover the corners.
pub fn desk_geometry(detector_count: usize) -> FanBeamGeometry {
    FanBeamGeometry::new(
        [-1.5, 0.0],
        [1.5, 0.0],
        [0.0, 1.0],
        3.2,
        detector_count,
    )
    .expect("desk geometry is valid")
}

/// A tiny random recovery instance: a coarse grid, a handful of disc
/// columns at random in-domain centers (pairwise far enough apart to
/// leave disjoint supports available), and its projector.
pub struct TinyInstance {
    pub grid: ImageGrid,
    pub projector: SparseProjector,
    pub dictionary: Dictionary,
}

pub fn tiny_instance(seed: u64, p_target: usize) -> TinyInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 16;
    let grid = ImageGrid::new(1.0, 1.0, n, n).unwrap();
    let geometry = desk_geometry(48);
    let projector = build_fan_projector(&grid, &geometry).unwrap();
    let radius = rng.random_range(0.08..0.14);

    // Rejection-sample distinct centers on pixel centers with margin.
    let mut centers: Vec<[f64; 2]> = Vec::new();
    let margin = radius + grid.dx();
    while centers.len() < p_target {
        let c = [
            rng.random_range(-0.5 + margin..0.5 - margin),
            rng.random_range(-0.5 + margin..0.5 - margin),
        ];
        centers.push(c);
    }
    let dictionary = build_dictionary(
        &[ShapeSpec::Disc {
            radius,
            intensity: 1.0,
        }],
        &TranslationLattice::Explicit(centers),
        &[0.0],
        &grid,
    )
    .unwrap();
    TinyInstance {
        grid,
        projector,
        dictionary,
    }
}

/// Draw `k` indices whose dictionary supports are pairwise disjoint, or
/// `None` if the instance cannot host `k` disjoint columns.
pub fn disjoint_selection(
    dict: &Dictionary,
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Option<Vec<usize>> {
    'attempt: for _ in 0..5_000 {
        let pick = rand::seq::index::sample(rng, dict.p(), k);
        let mut occupied = vec![false; dict.n()];
        for j in pick.iter() {
            for &px in &dict.column(j).indices {
                if occupied[px] {
                    continue 'attempt;
                }
                occupied[px] = true;
            }
        }
        return Some(pick.iter().collect());
    }
    None
}
