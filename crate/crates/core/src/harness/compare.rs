use std::time::{Duration, Instant};

use rayon::prelude::*;

use super::{Algorithm, SimConfig};
use crate::error::{Error, Result};
use crate::langevin::run_chain_thinned;
use crate::objective::{Objective, ObjectiveSpec};
use crate::replica::{run_replica, ReplicaState, ReplicaStreams, SwapPolicy};
use crate::rng::{Purpose, RngStream};
use crate::trace::Trace;

/// Per-seed best-so-far curves of one algorithm and their pointwise
/// quartiles.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub algorithm: Algorithm,
    /// Iterations at which curves are sampled (shared by all seeds).
    pub iterations: Vec<u64>,
    /// `curves[r][k]`: best value up to `iterations[k]` for replicate `r`.
    pub curves: Vec<Vec<f64>>,
    pub median: Vec<f64>,
    pub q25: Vec<f64>,
    pub q75: Vec<f64>,
    /// Best value over the whole run, per replicate.
    pub final_best: Vec<f64>,
    /// Swaps per replicate (zero for single chains).
    pub swap_counts: Vec<u64>,
    pub wall_time: Duration,
}

impl PartialEq for RunSummary {
    fn eq(&self, other: &Self) -> bool {
        self.algorithm == other.algorithm
            && self.iterations == other.iterations
            && self.curves == other.curves
            && self.median == other.median
            && self.q25 == other.q25
            && self.q75 == other.q75
            && self.final_best == other.final_best
            && self.swap_counts == other.swap_counts
    }
}

impl RunSummary {
    pub fn median_final_best(&self) -> f64 {
        quantile(&self.final_best, 0.5)
    }

    pub fn mean_swap_count(&self) -> f64 {
        self.swap_counts.iter().sum::<u64>() as f64 / self.swap_counts.len().max(1) as f64
    }
}

/// Sample quantile with linear interpolation between order statistics
/// (`h = (n − 1)·p`). Returns NaN for an empty sample.
pub fn quantile(values: &[f64], p: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = (v.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

/// How replicates are scheduled. Results do not depend on the choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

fn run_built(config: &SimConfig, f: &dyn Objective, replicate: u64) -> Result<Trace> {
    let init = config.init.sample(f.dimension(), config.seed, replicate);
    let run = || -> Result<Trace> {
        match config.algorithm {
            Algorithm::LowTemp => {
                let mut rng = RngStream::for_chain(config.seed, Purpose::Noise1, replicate);
                run_chain_thinned(
                    &init,
                    f,
                    config.tau1,
                    config.eta,
                    config.steps,
                    config.stride,
                    &mut rng,
                )
            }
            Algorithm::HighTemp => {
                let mut rng = RngStream::for_chain(config.seed, Purpose::Noise2, replicate);
                run_chain_thinned(
                    &init,
                    f,
                    config.tau2,
                    config.eta,
                    config.steps,
                    config.stride,
                    &mut rng,
                )
            }
            Algorithm::ReplicaExchange => {
                let policy = SwapPolicy::new(config.intensity, config.eta)?;
                let mut streams = ReplicaStreams::for_chain(config.seed, replicate);
                run_replica(
                    ReplicaState::from_point(&init, config.tau1, config.tau2),
                    f,
                    &policy,
                    &mut streams,
                    config.formulation,
                    config.steps,
                    config.stride,
                )
            }
        }
    };
    run().map_err(|e| Error::Run {
        algorithm: config.algorithm,
        replicate,
        source: Box::new(e),
    })
}

/// One replicate of `config`. The low-temperature chain draws its noise from
/// the same stream as particle 1 of the replica pair, and the
/// high-temperature chain from the stream of particle 2.
pub fn run_single(config: &SimConfig, replicate: u64) -> Result<Trace> {
    config.validate()?;
    let f = config.objective.build()?;
    run_built(config, f.as_ref(), replicate)
}

/// All replicates of `config`, in parallel.
pub fn run_config(config: &SimConfig) -> Result<RunSummary> {
    run_config_with(config, Execution::Parallel)
}

pub fn run_config_with(config: &SimConfig, execution: Execution) -> Result<RunSummary> {
    config.validate()?;
    let f = config.objective.build()?;
    let f = f.as_ref();
    let start = Instant::now();
    let replicates = 0..config.replicates as u64;
    let traces: Vec<Trace> = match execution {
        Execution::Serial => replicates
            .map(|r| run_built(config, f, r))
            .collect::<Result<_>>()?,
        Execution::Parallel => replicates
            .into_par_iter()
            .map(|r| run_built(config, f, r))
            .collect::<Vec<_>>()
            .into_iter()
            .collect::<Result<_>>()?,
    };
    Ok(summarize(config.algorithm, &traces, start.elapsed()))
}

fn summarize(algorithm: Algorithm, traces: &[Trace], wall_time: Duration) -> RunSummary {
    let iterations = traces[0].iterations();
    let curves: Vec<Vec<f64>> = traces.iter().map(Trace::best_so_far).collect();
    let column = |k: usize| -> Vec<f64> { curves.iter().map(|c| c[k]).collect() };
    let (mut median, mut q25, mut q75) = (Vec::new(), Vec::new(), Vec::new());
    for k in 0..iterations.len() {
        let col = column(k);
        median.push(quantile(&col, 0.5));
        q25.push(quantile(&col, 0.25));
        q75.push(quantile(&col, 0.75));
    }
    RunSummary {
        algorithm,
        iterations,
        final_best: traces.iter().filter_map(Trace::final_best).collect(),
        swap_counts: traces.iter().map(Trace::swap_count).collect(),
        curves,
        median,
        q25,
        q75,
        wall_time,
    }
}

/// The three configurations of a comparison: `base` with each algorithm.
pub fn comparison_configs(base: &SimConfig) -> [SimConfig; 3] {
    Algorithm::ALL.map(|algorithm| SimConfig {
        algorithm,
        ..base.clone()
    })
}

/// Runs low-temp, high-temp and replica exchange on a common seed set.
/// Returned in that order.
pub fn run_comparison(base: &SimConfig) -> Result<[RunSummary; 3]> {
    let [lt, ht, re] = comparison_configs(base);
    Ok([run_config(&lt)?, run_config(&ht)?, run_config(&re)?])
}

/// One comparison per κ, replacing the width of the mixture in `base`.
pub fn kappa_sweep(kappas: &[f64], base: &SimConfig) -> Result<Vec<(f64, [RunSummary; 3])>> {
    if kappas.is_empty() {
        return Err(Error::EmptyInput("no kappa values to sweep"));
    }
    let ObjectiveSpec::Mixture(spec) = &base.objective else {
        return Err(Error::Config(
            "a kappa sweep needs a Gaussian-mixture objective".into(),
        ));
    };
    kappas
        .iter()
        .map(|&kappa| {
            if !(kappa > 0.0 && kappa.is_finite()) {
                return Err(Error::Config(format!(
                    "kappa must be positive, got {kappa}"
                )));
            }
            let mut spec = spec.clone();
            spec.kappa = kappa;
            let config = SimConfig {
                objective: ObjectiveSpec::Mixture(spec),
                ..base.clone()
            };
            Ok((kappa, run_comparison(&config)?))
        })
        .collect()
}
