use rayon::prelude::*;

use super::divergence::chi_square_divergence;
use super::grid::{empirical_histogram, pair_gibbs_density, GridMeasure, Interval};
use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::replica::{Formulation, ReplicaState, ReplicaStreams, SwapPolicy};
use crate::rng::{Purpose, RngStream};

/// Smallest ensemble accepted by [`chi2_decay_experiment`].
pub const MIN_DECAY_ENSEMBLE: usize = 1000;

/// χ² values at or below this level are excluded from the rate fit.
pub const FIT_THRESHOLD: f64 = 0.01;

/// Settings of a χ² decay run for a one-dimensional objective.
#[derive(Debug, Clone, PartialEq)]
pub struct DecaySetup {
    pub tau1: f64,
    pub tau2: f64,
    pub intensity: f64,
    pub eta: f64,
    pub ensemble: usize,
    /// Strictly increasing positive times; each is rounded to a whole number
    /// of steps.
    pub sample_times: Vec<f64>,
    /// Axis of the square pair grid.
    pub axis: Interval,
    pub resolution: usize,
    pub seed: u64,
    /// Starting positions of the (low, high) temperature particles.
    pub init: [f64; 2],
    /// Bootstrap resamples per sample time.
    pub bootstrap: usize,
}

/// χ² trajectory and the fitted exponential rate of its decay.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub times: Vec<f64>,
    pub chi2: Vec<f64>,
    pub bootstrap_std: Vec<f64>,
    /// `−slope` of the least-squares line through `(t, ln χ²)`.
    pub rate: f64,
    /// Bootstrap standard deviation of `rate` (resamples whose fit fails are
    /// skipped).
    pub rate_std: f64,
    pub r2: f64,
    /// Number of sample times that entered the fit.
    pub fitted_points: usize,
}

/// Least-squares fit of `ln y = c − rate·t` over the points with
/// `y > threshold`. Returns `(rate, r², points used)`.
pub fn fit_exponential_decay(
    times: &[f64],
    values: &[f64],
    threshold: f64,
) -> Result<(f64, f64, usize)> {
    let (t, y): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(values)
        .filter(|(_, &v)| v > threshold)
        .map(|(&t, &v)| (t, v.ln()))
        .unzip();
    let n = t.len();
    if n < 3 {
        return Err(Error::Fit(format!(
            "only {n} sample times have χ² above {threshold}; at least 3 are needed"
        )));
    }
    let nf = n as f64;
    let tm = t.iter().sum::<f64>() / nf;
    let ym = y.iter().sum::<f64>() / nf;
    let stt: f64 = t.iter().map(|v| (v - tm).powi(2)).sum();
    let sty: f64 = t.iter().zip(&y).map(|(a, b)| (a - tm) * (b - ym)).sum();
    let syy: f64 = y.iter().map(|v| (v - ym).powi(2)).sum();
    if stt == 0.0 {
        return Err(Error::Fit("sample times in the fit window coincide".into()));
    }
    let slope = sty / stt;
    let residual = syy - slope * sty;
    let r2 = if syy > 0.0 { 1.0 - residual / syy } else { 1.0 };
    Ok((-slope, r2, n))
}

fn sample_steps(times: &[f64], eta: f64) -> Result<Vec<u64>> {
    if times.is_empty() {
        return Err(Error::EmptyInput("no sample times"));
    }
    let mut prev = 0u64;
    times
        .iter()
        .map(|&t| {
            let k = (t / eta).round();
            if !(t > 0.0 && k >= 1.0 && k.is_finite()) || (k as u64) <= prev {
                return Err(Error::Input(format!(
                    "sample times must be positive, strictly increasing and at least one step apart (at t = {t})"
                )));
            }
            prev = k as u64;
            Ok(prev)
        })
        .collect()
}

/// Snapshot of `(low, high)` positions of every chain at each sample time.
fn ensemble_snapshots(
    f: &dyn Objective,
    setup: &DecaySetup,
    steps: &[u64],
) -> Result<Vec<Vec<[f64; 2]>>> {
    let policy = SwapPolicy::new(setup.intensity, setup.eta)?;
    let per_chain: Vec<Vec<[f64; 2]>> = (0..setup.ensemble as u64)
        .into_par_iter()
        .map(|chain| {
            let mut streams = ReplicaStreams::for_chain(setup.seed, chain);
            let mut state = ReplicaState::new(
                vec![setup.init[0]],
                vec![setup.init[1]],
                setup.tau1,
                setup.tau2,
            );
            let mut out = Vec::with_capacity(steps.len());
            for &target in steps {
                while state.iteration < target {
                    streams.step(&mut state, f, &policy, Formulation::TemperatureSwap)?;
                }
                let (lo, hi) = state.by_temperature();
                out.push([lo[0], hi[0]]);
            }
            Ok(out)
        })
        .collect::<Vec<Result<_>>>()
        .into_iter()
        .collect::<Result<_>>()?;
    Ok((0..steps.len())
        .map(|j| per_chain.iter().map(|c| c[j]).collect())
        .collect())
}

/// Resamples whole chains (the same indices at every sample time) and
/// returns the standard deviation of χ² per time and of the fitted rate.
fn bootstrap(
    snapshots: &[Vec<[f64; 2]>],
    pi: &GridMeasure,
    times: &[f64],
    resamples: usize,
    seed: u64,
) -> Result<(Vec<f64>, f64)> {
    if resamples < 2 {
        return Ok((vec![0.0; snapshots.len()], 0.0));
    }
    let n = snapshots[0].len();
    let axes = pi.axes().to_vec();
    let draws: Vec<(Vec<f64>, Option<f64>)> = (0..resamples as u64)
        .into_par_iter()
        .map(|b| {
            let mut rng = RngStream::for_chain(seed, Purpose::Bootstrap, b);
            let picks: Vec<usize> = (0..n).map(|_| rng.index(n)).collect();
            let chi2 = snapshots
                .iter()
                .map(|points| {
                    let sample: Vec<[f64; 2]> = picks.iter().map(|&i| points[i]).collect();
                    let h = empirical_histogram(&sample, &axes, pi.resolution())?;
                    chi_square_divergence(&h, pi)
                })
                .collect::<Result<Vec<f64>>>()?;
            let rate = fit_exponential_decay(times, &chi2, FIT_THRESHOLD)
                .ok()
                .map(|r| r.0);
            Ok((chi2, rate))
        })
        .collect::<Vec<Result<_>>>()
        .into_iter()
        .collect::<Result<_>>()?;
    let per_time = (0..snapshots.len())
        .map(|j| sample_std(draws.iter().map(|d| d.0[j])))
        .collect();
    let rate_std = sample_std(draws.iter().filter_map(|d| d.1));
    Ok((per_time, rate_std))
}

fn sample_std(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    if v.len() < 2 {
        return f64::NAN;
    }
    let m = v.iter().sum::<f64>() / v.len() as f64;
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

/// Runs an ensemble of replica pairs from a point mass, estimates the law of
/// the `(low, high)` pair on the product grid at each sample time, and fits
/// the exponential decay of its χ² divergence from the product Gibbs density.
///
/// Chains use per-chain streams, so two runs that differ only in the swap
/// intensity share their position noise.
pub fn chi2_decay_experiment(f: &dyn Objective, setup: &DecaySetup) -> Result<DecayFit> {
    if f.dimension() != 1 {
        return Err(Error::Input(
            "the χ² decay experiment needs a one-dimensional objective".into(),
        ));
    }
    if setup.ensemble < MIN_DECAY_ENSEMBLE {
        return Err(Error::Input(format!(
            "ensemble size {} is below the minimum of {MIN_DECAY_ENSEMBLE}",
            setup.ensemble
        )));
    }
    if !(setup.tau1 < setup.tau2) {
        return Err(Error::Input("need tau1 < tau2".into()));
    }
    let steps = sample_steps(&setup.sample_times, setup.eta)?;
    let pi = pair_gibbs_density(f, setup.tau1, setup.tau2, setup.axis, setup.resolution)?;
    let snapshots = ensemble_snapshots(f, setup, &steps)?;

    let chi2: Vec<f64> = snapshots
        .par_iter()
        .map(|points| {
            let h = empirical_histogram(points, &[setup.axis, setup.axis], setup.resolution)?;
            chi_square_divergence(&h, &pi)
        })
        .collect::<Vec<Result<_>>>()
        .into_iter()
        .collect::<Result<_>>()?;
    let times: Vec<f64> = steps.iter().map(|&k| k as f64 * setup.eta).collect();
    let (rate, r2, fitted_points) = fit_exponential_decay(&times, &chi2, FIT_THRESHOLD)?;
    let (bootstrap_std, rate_std) =
        bootstrap(&snapshots, &pi, &times, setup.bootstrap, setup.seed)?;
    Ok(DecayFit {
        times,
        chi2,
        bootstrap_std,
        rate,
        rate_std,
        r2,
        fitted_points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::DoubleWell;

    #[test]
    fn exact_exponential_fit() {
        let t: [f64; 4] = [0.5, 1.0, 2.0, 3.0];
        let y: Vec<f64> = t.iter().map(|t| 2.0 * (-0.7 * t).exp()).collect();
        let (rate, r2, n) = fit_exponential_decay(&t, &y, 0.01).unwrap();
        assert!((rate - 0.7).abs() < 1e-12);
        assert!((r2 - 1.0).abs() < 1e-12);
        assert_eq!(n, 4);
    }

    #[test]
    fn fit_window_excludes_noise_floor() {
        let t = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y = [1.0, 0.5, 0.25, 0.005, 0.009];
        let (rate, _, n) = fit_exponential_decay(&t, &y, 0.01).unwrap();
        assert_eq!(n, 3);
        assert!((rate - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn too_few_points_is_fit_error() {
        let r = fit_exponential_decay(&[1.0, 2.0, 3.0], &[1.0, 0.5, 0.001], 0.01);
        assert!(matches!(r, Err(Error::Fit(_))));
    }

    fn setup(ensemble: usize) -> DecaySetup {
        DecaySetup {
            tau1: 0.1,
            tau2: 1.0,
            intensity: 5.0,
            eta: 0.001,
            ensemble,
            sample_times: vec![0.05, 0.1, 0.2],
            axis: Interval::new(-3.0, 3.0).unwrap(),
            resolution: 12,
            seed: 3,
            init: [-1.0, 1.0],
            bootstrap: 10,
        }
    }

    #[test]
    fn small_ensemble_rejected() {
        assert!(matches!(
            chi2_decay_experiment(&DoubleWell, &setup(999)),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn sample_times_validated() {
        assert!(sample_steps(&[0.2, 0.1], 0.001).is_err());
        assert!(sample_steps(&[0.0], 0.001).is_err());
        assert_eq!(sample_steps(&[0.25, 1.0], 0.001).unwrap(), vec![250, 1000]);
    }

    #[test]
    fn early_decay_is_reproducible() {
        let a = chi2_decay_experiment(&DoubleWell, &setup(1000)).unwrap();
        let b = chi2_decay_experiment(&DoubleWell, &setup(1000)).unwrap();
        assert_eq!(a, b);
        assert!(a.chi2.iter().all(|c| *c >= 0.0));
        assert!(a.bootstrap_std.iter().all(|s| *s > 0.0));
        assert!(a.rate > 0.0, "rate {}", a.rate);
        assert!(a.rate_std > 0.0);
    }
}
