//! Seed derivation and label-density sampling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Derives a child seed from a parent seed and a path of indices
/// (splitmix64 finalizer applied per step).
pub fn derive_seed(parent: u64, path: &[u64]) -> u64 {
    let mut s = parent;
    for &p in path {
        s = splitmix(s ^ splitmix(p.wrapping_add(0x9E37_79B9_7F4A_7C15)));
    }
    s
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Number of known nodes for a density: `round(density * n)`, clamped to
/// `[1, n - 1]` so both V^K and V^U are non-empty.
pub fn known_count(n: usize, density: f64) -> Result<usize> {
    if !(density > 0.0 && density < 1.0) {
        return Err(Error::Config(format!("density must lie strictly between 0 and 1, got {density}")));
    }
    if n < 2 {
        return Err(Error::Data("need at least 2 nodes to split known/unknown".into()));
    }
    let m = (density * n as f64).round() as usize;
    if m == 0 {
        log::warn!("density {density} rounds to 0 of {n} nodes; using 1 known node");
    }
    Ok(m.clamp(1, n - 1))
}

/// Draws V^K uniformly without replacement; returned sorted.
pub fn sample_known(n: usize, density: f64, seed: u64) -> Result<Vec<usize>> {
    let m = known_count(n, density)?;
    let mut rng = rng_for(seed);
    let mut picked = rand::seq::index::sample(&mut rng, n, m).into_vec();
    picked.sort_unstable();
    Ok(picked)
}
