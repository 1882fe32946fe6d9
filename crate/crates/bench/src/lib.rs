//! Shared fixtures for the kernel benchmarks.

use relex_core::diagnostics::{pair_gibbs_density, GridMeasure, Interval};
use relex_core::objective::{benchmark_mixture, DoubleWell, GaussianMixture};
use relex_core::rng::{Purpose, RngStream};

pub fn mixture() -> GaussianMixture {
    benchmark_mixture(0.1).expect("benchmark mixture is valid")
}

/// Product Gibbs grid of the double well at temperatures (0.1, 1).
pub fn pair_grid(resolution: usize) -> GridMeasure {
    let axis = Interval::new(-3.0, 3.0).expect("valid axis");
    pair_gibbs_density(&DoubleWell, 0.1, 1.0, axis, resolution).expect("grid covers the mass")
}

/// `n` pair positions scattered around the two wells.
pub fn pair_sample(n: usize, seed: u64) -> Vec<[f64; 2]> {
    let mut rng = RngStream::for_chain(seed, Purpose::MonteCarlo, 0);
    (0..n)
        .map(|_| {
            let side = if rng.uniform() < 0.5 { -1.0 } else { 1.0 };
            [side + 0.2 * rng.gaussian(), rng.gaussian()]
        })
        .collect()
}
