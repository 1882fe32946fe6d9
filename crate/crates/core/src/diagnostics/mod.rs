//! Grid-based instruments: Gibbs densities, histograms, χ² and total
//! variation, χ² decay experiments, and the swap contribution to the
//! Dirichlet form.

mod decay;
mod dirichlet;
mod divergence;
mod grid;

pub use decay::{
    chi2_decay_experiment, fit_exponential_decay, DecayFit, DecaySetup, FIT_THRESHOLD,
    MIN_DECAY_ENSEMBLE,
};
pub use dirichlet::dirichlet_acceleration_term;
pub use divergence::{chi_square_divergence, total_variation, CHI2_FLOOR};
pub use grid::{
    empirical_histogram, gibbs_density, pair_gibbs_density, truncated_gibbs_density, GridMeasure,
    Interval, TRUNCATION_LIMIT,
};

use crate::error::{Error, Result};

/// Running minimum of `values`.
pub fn best_so_far(values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::EmptyInput("no values in trace"));
    }
    Ok(values
        .iter()
        .scan(f64::INFINITY, |best, &v| {
            *best = best.min(v);
            Some(*best)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn running_minimum() {
        assert_eq!(
            best_so_far(&[3.0, 1.0, 2.0, 0.0]).unwrap(),
            vec![3.0, 1.0, 1.0, 0.0]
        );
        assert_eq!(best_so_far(&[2.0; 4]).unwrap(), vec![2.0; 4]);
        assert!(matches!(best_so_far(&[]), Err(Error::EmptyInput(_))));
    }
}
