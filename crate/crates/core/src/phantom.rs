//! Ground-truth phantoms: binary combinations of dictionary columns with
//! pairwise-disjoint supports.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dictionary::Dictionary;
use crate::error::{Error, Result};

/// Rejection-sampling attempt cap for [`random_phantom`]. A draw that
/// cannot place `K` disjoint shapes within this many attempts fails with
/// [`Error::PlacementInfeasible`] rather than looping forever.
pub const PLACEMENT_RETRY_CAP: usize = 10_000;

/// A `K`-shape ground truth: dense image `x = Ψ z*`, the binary
/// coefficient vector `z*`, and the selected column indices (ascending).
#[derive(Clone, Debug)]
pub struct Phantom {
    pub image: Vec<f64>,
    pub coefficients: Vec<f64>,
    pub selected: Vec<usize>,
}

impl Phantom {
    pub fn k(&self) -> usize {
        self.selected.len()
    }
}

/// Build a phantom from explicitly chosen columns, validating that the
/// supports are pairwise disjoint (shapes must not overlap, or the binary
/// coefficient model would double-count intensities).
pub fn phantom_from_columns(dict: &Dictionary, selected: &[usize]) -> Result<Phantom> {
    let p = dict.p();
    if selected.is_empty() || selected.len() > p {
        return Err(Error::InfeasibleBudget {
            k: selected.len() as f64,
            p,
        });
    }
    let mut sorted: Vec<usize> = selected.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != selected.len() {
        return Err(Error::InvalidConfig(
            "phantom column selection contains duplicates".into(),
        ));
    }
    if sorted.iter().any(|&k| k >= p) {
        return Err(Error::InvalidConfig(
            "phantom column selection out of range".into(),
        ));
    }

    let mut occupied = vec![false; dict.n()];
    for &k in &sorted {
        for &j in &dict.column(k).indices {
            if occupied[j] {
                return Err(Error::InvalidConfig(format!(
                    "phantom columns overlap at pixel {j}"
                )));
            }
            occupied[j] = true;
        }
    }

    let mut coefficients = vec![0.0; p];
    let mut image = vec![0.0; dict.n()];
    for &k in &sorted {
        coefficients[k] = 1.0;
        dict.column(k).add_into(1.0, &mut image);
    }
    Ok(Phantom {
        image,
        coefficients,
        selected: sorted,
    })
}

/// Draw `k` dictionary columns uniformly at random, conditioned on
/// pairwise-disjoint supports, by rejection sampling of whole `k`-subsets.
/// Deterministic for a given `(dictionary, k, seed)`.
pub fn random_phantom(dict: &Dictionary, k: usize, seed: u64) -> Result<Phantom> {
    let p = dict.p();
    if k == 0 || k > p {
        return Err(Error::InfeasibleBudget { k: k as f64, p });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut occupied = vec![false; dict.n()];

    for _attempt in 0..PLACEMENT_RETRY_CAP {
        let pick = rand::seq::index::sample(&mut rng, p, k);
        occupied.fill(false);
        let mut ok = true;
        'cols: for k_idx in pick.iter() {
            for &j in &dict.column(k_idx).indices {
                if occupied[j] {
                    ok = false;
                    break 'cols;
                }
                occupied[j] = true;
            }
        }
        if ok {
            let selected: Vec<usize> = pick.iter().collect();
            return phantom_from_columns(dict, &selected);
        }
    }
    Err(Error::PlacementInfeasible {
        k,
        attempts: PLACEMENT_RETRY_CAP,
    })
}

/// Draw one random column per shape family (`K` = family count), again by
/// whole-draw rejection sampling until the supports are pairwise disjoint.
/// This is the mixed-shape scenario: every family contributes exactly one
/// instance. Deterministic for a given `(dictionary, seed)`.
pub fn random_phantom_one_per_shape(dict: &Dictionary, seed: u64) -> Result<Phantom> {
    let families = dict.shape_count();
    let p = dict.p();
    if families == 0 || families > p {
        return Err(Error::InfeasibleBudget {
            k: families as f64,
            p,
        });
    }
    let mut by_family: Vec<Vec<usize>> = vec![Vec::new(); families];
    for k in 0..p {
        by_family[dict.meta(k).shape_index].push(k);
    }
    if let Some(empty) = by_family.iter().position(|f| f.is_empty()) {
        return Err(Error::InvalidConfig(format!(
            "shape family {empty} contributed no dictionary columns"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut occupied = vec![false; dict.n()];
    for _attempt in 0..PLACEMENT_RETRY_CAP {
        occupied.fill(false);
        let mut selected = Vec::with_capacity(families);
        let mut ok = true;
        'families: for family in &by_family {
            let k_idx = family[rand::Rng::random_range(&mut rng, 0..family.len())];
            for &j in &dict.column(k_idx).indices {
                if occupied[j] {
                    ok = false;
                    break 'families;
                }
                occupied[j] = true;
            }
            selected.push(k_idx);
        }
        if ok {
            return phantom_from_columns(dict, &selected);
        }
    }
    Err(Error::PlacementInfeasible {
        k: families,
        attempts: PLACEMENT_RETRY_CAP,
    })
}
