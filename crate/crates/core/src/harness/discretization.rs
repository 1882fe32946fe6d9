use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::langevin::{advance_with_increment, check_dimension};
use crate::objective::Objective;
use crate::replica::{swap_rate, ReplicaState};
use crate::rng::{Purpose, RngStream};

/// Default ratio between the smallest tested stepsize and the reference
/// stepsize.
pub const REFINEMENT: u64 = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizationSetup {
    pub tau1: f64,
    pub tau2: f64,
    pub intensity: f64,
    /// Coarse stepsizes under test.
    pub etas: Vec<f64>,
    /// Time at which coarse and reference runs are compared.
    pub horizon: f64,
    pub ensemble: usize,
    pub seed: u64,
    /// Starting positions of the particles at `tau1` and `tau2`.
    pub init: [Vec<f64>; 2],
    /// The reference stepsize is `min(etas) / refinement`.
    pub refinement: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscretizationPoint {
    pub eta: f64,
    /// Ensemble mean of `‖Z_T − Z_T^ref‖²` over both particles.
    pub mse: f64,
    /// Standard error of `mse`.
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizationResult {
    pub reference_eta: f64,
    pub points: Vec<DiscretizationPoint>,
    /// Least-squares slope of `ln mse` against `ln η` over the points with
    /// positive error; `None` with fewer than two such points.
    pub slope: Option<f64>,
}

/// Integer ratio `num / den`, or `None` when it is not a whole number.
fn whole_ratio(num: f64, den: f64) -> Option<u64> {
    let r = (num / den).round();
    ((r * den - num).abs() <= 1e-9 * num.abs() && r >= 1.0).then_some(r as u64)
}

/// Steps per coarse step and number of coarse steps, for each `η`.
fn schedule(setup: &DiscretizationSetup) -> Result<(f64, Vec<(u64, u64)>)> {
    if setup.etas.is_empty() {
        return Err(Error::Config("no stepsizes given".into()));
    }
    if setup.etas.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        return Err(Error::Config("stepsizes must be positive".into()));
    }
    if !(setup.horizon > 0.0 && setup.horizon.is_finite()) {
        return Err(Error::Config("the horizon must be positive".into()));
    }
    if setup.refinement == 0 {
        return Err(Error::Config("refinement must be positive".into()));
    }
    if setup.ensemble < 2 {
        return Err(Error::Config(
            "the ensemble needs at least two chains".into(),
        ));
    }
    let finest = setup.etas.iter().copied().fold(f64::INFINITY, f64::min);
    let reference = finest / setup.refinement as f64;
    let plan = setup
        .etas
        .iter()
        .map(|&eta| {
            let fine = whole_ratio(eta, reference).ok_or_else(|| {
                Error::Config(format!(
                    "stepsize {eta} is not a whole multiple of the reference stepsize {reference}"
                ))
            })?;
            let coarse = whole_ratio(setup.horizon, eta).ok_or_else(|| {
                Error::Config(format!(
                    "horizon {} is not a whole number of steps of size {eta}",
                    setup.horizon
                ))
            })?;
            Ok((fine, coarse))
        })
        .collect::<Result<_>>()?;
    Ok((reference, plan))
}

struct CoupledRun {
    state: ReplicaState,
    /// Sum of all Brownian increments consumed, per particle.
    path_end: [Vec<f64>; 2],
}

/// One run with coarse steps made of `fine` reference steps each. The
/// Brownian increment of a coarse step is the sum of its fine increments, and
/// a swap fires iff any of its fine swap uniforms falls below the fine-step
/// swap probability evaluated at the coarse pre-step state.
#[allow(clippy::too_many_arguments)]
fn coupled_run(
    f: &dyn Objective,
    setup: &DiscretizationSetup,
    reference: f64,
    fine: u64,
    coarse_steps: u64,
    chain: u64,
) -> Result<CoupledRun> {
    let d = f.dimension();
    let eta = reference * fine as f64;
    let sqrt_ref = reference.sqrt();
    let mut noise = [
        RngStream::for_chain(setup.seed, Purpose::Noise1, chain),
        RngStream::for_chain(setup.seed, Purpose::Noise2, chain),
    ];
    let mut uniforms = RngStream::for_chain(setup.seed, Purpose::Swap, chain);
    let mut state = ReplicaState::new(
        setup.init[0].clone(),
        setup.init[1].clone(),
        setup.tau1,
        setup.tau2,
    );
    let mut path_end = [vec![0.0; d], vec![0.0; d]];
    let mut dw = [vec![0.0; d], vec![0.0; d]];
    for k in 1..=coarse_steps {
        let rate = swap_rate(
            f.value(&state.pos1),
            f.value(&state.pos2),
            state.temp1,
            state.temp2,
        )
        .map_err(|_| Error::Divergence { iteration: k - 1 })?;
        let p = (setup.intensity * reference * rate).clamp(0.0, 1.0);
        let mut fired = false;
        for w in dw.iter_mut() {
            w.fill(0.0);
        }
        for _ in 0..fine {
            for (particle, rng) in noise.iter_mut().enumerate() {
                for i in 0..d {
                    let inc = sqrt_ref * rng.gaussian();
                    dw[particle][i] += inc;
                    path_end[particle][i] += inc;
                }
            }
            fired |= uniforms.uniform() < p;
        }
        advance_with_increment(&mut state.pos1, f, eta, state.temp1, &dw[0], k)?;
        advance_with_increment(&mut state.pos2, f, eta, state.temp2, &dw[1], k)?;
        if fired {
            std::mem::swap(&mut state.temp1, &mut state.temp2);
            state.swap_count += 1;
        }
        state.iteration = k;
    }
    Ok(CoupledRun { state, path_end })
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

/// Strong-error scaling of the replica-exchange Euler–Maruyama scheme. For
/// each coarse stepsize, every chain is run alongside a reference run at
/// `min(etas) / refinement` that consumes the same Brownian increments and
/// swap uniforms; the mean squared distance between the two at the horizon
/// is reported together with the fitted log-log slope.
pub fn discretization_error_experiment(
    f: &dyn Objective,
    setup: &DiscretizationSetup,
) -> Result<DiscretizationResult> {
    let (reference, plan) = schedule(setup)?;
    if !(setup.tau1 > 0.0 && setup.tau2 > 0.0) {
        return Err(Error::Config("temperatures must be positive".into()));
    }
    if !(setup.intensity >= 0.0 && setup.intensity.is_finite()) {
        return Err(Error::Config("intensity must be nonnegative".into()));
    }
    check_dimension(f, &setup.init[0])?;
    check_dimension(f, &setup.init[1])?;
    let reference_steps = plan[0].0 * plan[0].1;

    let per_chain: Vec<Vec<f64>> = (0..setup.ensemble as u64)
        .into_par_iter()
        .map(|chain| {
            let exact = coupled_run(f, setup, reference, 1, reference_steps, chain)?;
            plan.iter()
                .map(|&(fine, coarse)| {
                    let run = coupled_run(f, setup, reference, fine, coarse, chain)?;
                    for (a, b) in run.path_end.iter().zip(&exact.path_end) {
                        for (x, y) in a.iter().zip(b) {
                            assert!(
                                (x - y).abs() <= 1e-9 * (1.0 + y.abs()),
                                "coarse Brownian increments do not sum to the reference path"
                            );
                        }
                    }
                    Ok(squared_distance(&run.state.pos1, &exact.state.pos1)
                        + squared_distance(&run.state.pos2, &exact.state.pos2))
                })
                .collect()
        })
        .collect::<Vec<Result<_>>>()
        .into_iter()
        .collect::<Result<_>>()?;

    let n = setup.ensemble as f64;
    let points: Vec<DiscretizationPoint> = setup
        .etas
        .iter()
        .enumerate()
        .map(|(j, &eta)| {
            let errs: Vec<f64> = per_chain.iter().map(|c| c[j]).collect();
            let mse = errs.iter().sum::<f64>() / n;
            let var = errs.iter().map(|e| (e - mse).powi(2)).sum::<f64>() / (n - 1.0);
            DiscretizationPoint {
                eta,
                mse,
                stderr: (var / n).sqrt(),
            }
        })
        .collect();
    Ok(DiscretizationResult {
        reference_eta: reference,
        slope: log_log_slope(&points),
        points,
    })
}

fn log_log_slope(points: &[DiscretizationPoint]) -> Option<f64> {
    let (x, y): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter(|p| p.mse > 0.0)
        .map(|p| (p.eta.ln(), p.mse.ln()))
        .unzip();
    if x.len() < 2 {
        return None;
    }
    let n = x.len() as f64;
    let xm = x.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - xm).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - xm) * (b - ym)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
