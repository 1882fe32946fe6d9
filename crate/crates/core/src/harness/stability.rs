use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::langevin::{advance, check_dimension, check_temperature};
use crate::objective::Objective;
use crate::rng::{Purpose, RngStream};

#[derive(Debug, Clone, PartialEq)]
pub struct StabilitySetup {
    /// Temperature of the chains (the higher temperature of a pair bounds
    /// the moments of both particles).
    pub tau: f64,
    pub etas: Vec<f64>,
    /// Lipschitz constant of the gradient, as estimated by the user.
    pub lipschitz: f64,
    /// Dissipativity constant `α` in `⟨x, ∇U(x)⟩ ≥ α‖x‖² − β`.
    pub alpha: f64,
    pub steps: u64,
    pub ensemble: usize,
    pub seed: u64,
    pub init: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityEntry {
    pub eta: f64,
    /// `η ≥ α / L²`: outside the range where moments are guaranteed bounded.
    pub above_threshold: bool,
    /// Largest ensemble mean of `‖Z_k‖²` over the iterations that completed.
    pub max_second_moment: f64,
    /// First iteration at which any chain diverged.
    pub diverged_at: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    /// `α / L²`.
    pub threshold: f64,
    pub entries: Vec<StabilityEntry>,
    /// Set when the objective is known not to be dissipative, in which case
    /// the threshold carries no guarantee.
    pub caveat: Option<String>,
}

fn second_moments(
    f: &dyn Objective,
    setup: &StabilitySetup,
    eta: f64,
    chain: u64,
) -> (Vec<f64>, Option<u64>) {
    let mut rng = RngStream::for_chain(setup.seed, Purpose::MonteCarlo, chain);
    let mut x = setup.init.clone();
    let mut out = Vec::with_capacity(setup.steps as usize + 1);
    out.push(x.iter().map(|v| v * v).sum());
    for k in 1..=setup.steps {
        if advance(&mut x, f, eta, setup.tau, &mut rng, k).is_err() {
            return (out, Some(k));
        }
        out.push(x.iter().map(|v| v * v).sum());
    }
    (out, None)
}

/// Runs Langevin ensembles at each stepsize and reports the largest running
/// second moment, flagging stepsizes at or above `α / L²`. Divergence is
/// reported, not raised.
pub fn stability_bound_check(f: &dyn Objective, setup: &StabilitySetup) -> Result<StabilityReport> {
    if setup.etas.is_empty() {
        return Err(Error::EmptyInput("no stepsizes to check"));
    }
    if !(setup.lipschitz > 0.0 && setup.alpha > 0.0) {
        return Err(Error::Input(
            "the Lipschitz and dissipativity estimates must be positive".into(),
        ));
    }
    if setup.ensemble == 0 || setup.steps == 0 {
        return Err(Error::Input("ensemble and steps must be positive".into()));
    }
    check_temperature(setup.tau)?;
    check_dimension(f, &setup.init)?;
    let threshold = setup.alpha / (setup.lipschitz * setup.lipschitz);
    let entries = setup
        .etas
        .iter()
        .map(|&eta| {
            if !(eta > 0.0 && eta.is_finite()) {
                return Err(Error::Input(format!(
                    "stepsize must be positive, got {eta}"
                )));
            }
            let runs: Vec<(Vec<f64>, Option<u64>)> = (0..setup.ensemble as u64)
                .into_par_iter()
                .map(|c| second_moments(f, setup, eta, c))
                .collect();
            let diverged_at = runs.iter().filter_map(|r| r.1).min();
            let completed = runs.iter().map(|r| r.0.len()).min().unwrap_or(0);
            let n = runs.len() as f64;
            let max_second_moment = (0..completed)
                .map(|k| runs.iter().map(|r| r.0[k]).sum::<f64>() / n)
                .fold(0.0, f64::max);
            Ok(StabilityEntry {
                eta,
                above_threshold: eta >= threshold,
                max_second_moment,
                diverged_at,
            })
        })
        .collect::<Result<_>>()?;
    let caveat = (f.is_dissipative() == Some(false)).then(|| {
        "not dissipative: the objective has no confining term, so the stepsize threshold carries no moment guarantee".to_string()
    });
    Ok(StabilityReport {
        threshold,
        entries,
        caveat,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::{benchmark_mixture, Quadratic};

    fn setup(tau: f64, etas: Vec<f64>) -> StabilitySetup {
        StabilitySetup {
            tau,
            etas,
            lipschitz: 1.0,
            alpha: 1.0,
            steps: 2000,
            ensemble: 400,
            seed: 9,
            init: vec![0.0],
        }
    }

    #[test]
    fn quadratic_moment_stays_below_bound() {
        let f = Quadratic::new(1, 1.0);
        let r = stability_bound_check(&f, &setup(1.0, vec![0.5])).unwrap();
        let e = &r.entries[0];
        assert!(!e.above_threshold);
        assert_eq!(e.diverged_at, None);
        // 2(β + dτ)η / (2αη − 2η²L²) with β = 0, d = 1.
        let bound = 2.0 * 0.5 / (2.0 * 0.5 - 2.0 * 0.25);
        // Stationary variance of the discretized chain is 2ητ / (1 − (1 − η)²) = 4/3.
        assert!(e.max_second_moment < bound + 0.3, "{}", e.max_second_moment);
        assert!(e.max_second_moment > 1.0);
        assert!(r.caveat.is_none());
    }

    #[test]
    fn gradient_descent_diverges_above_two() {
        let f = Quadratic::new(1, 1.0);
        let s = StabilitySetup {
            init: vec![1.0],
            ensemble: 2,
            ..setup(0.0, vec![1.9, 2.1])
        };
        let r = stability_bound_check(&f, &s).unwrap();
        assert_eq!(r.entries[0].diverged_at, None);
        assert!(r.entries[0].above_threshold);
        assert!(r.entries[1].diverged_at.is_some());
    }

    #[test]
    fn unconfined_mixture_is_flagged() {
        let f = benchmark_mixture(0.1).unwrap();
        let s = StabilitySetup {
            init: vec![2.0, 2.0],
            steps: 10,
            ensemble: 2,
            ..setup(0.1, vec![0.01])
        };
        let r = stability_bound_check(&f, &s).unwrap();
        assert!(r.caveat.unwrap().starts_with("not dissipative"));
    }
}
