//! Seeded canonical series for exercising the stationarity tests.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn normals(n: usize, seed: u64) -> impl Iterator<Item = f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(move |_| StandardNormal.sample(&mut rng))
}

/// i.i.d. standard normal draws.
pub fn white_noise(n: usize, seed: u64) -> Vec<f64> {
    normals(n, seed).collect()
}

/// Cumulative sum of standard normal steps, starting at the first step.
pub fn random_walk(n: usize, seed: u64) -> Vec<f64> {
    normals(n, seed)
        .scan(0.0, |acc, e| {
            *acc += e;
            Some(*acc)
        })
        .collect()
}

/// `slope * t + noise` for `t = 0..n`.
pub fn trend_plus_noise(n: usize, slope: f64, seed: u64) -> Vec<f64> {
    normals(n, seed)
        .enumerate()
        .map(|(t, e)| slope * t as f64 + e)
        .collect()
}
