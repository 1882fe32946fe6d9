//! Experiment orchestration: algorithm comparisons over many seeds, κ sweeps,
//! the stepsize-scaling experiment, the moment-stability check, and CSV
//! output.

mod compare;
mod csv;
mod discretization;
mod stability;

use std::fmt;
use std::str::FromStr;

pub use compare::{
    comparison_configs, kappa_sweep, quantile, run_comparison, run_config, run_config_with,
    run_single, Execution, RunSummary,
};
pub use csv::{write_bestsofar_csv, write_chi2decay_csv, write_discerr_csv, write_summary_csv};
pub use discretization::{
    discretization_error_experiment, DiscretizationPoint, DiscretizationResult,
    DiscretizationSetup, REFINEMENT,
};
pub use stability::{stability_bound_check, StabilityEntry, StabilityReport, StabilitySetup};

use crate::error::{Error, Result};
use crate::objective::ObjectiveSpec;
use crate::replica::Formulation;
use crate::rng::{Purpose, RngStream};

/// Which dynamics a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    /// Single Langevin chain at the low temperature.
    LowTemp,
    /// Single Langevin chain at the high temperature.
    HighTemp,
    ReplicaExchange,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [
        Algorithm::LowTemp,
        Algorithm::HighTemp,
        Algorithm::ReplicaExchange,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::LowTemp => "low-temp",
            Algorithm::HighTemp => "high-temp",
            Algorithm::ReplicaExchange => "replica-exchange",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown algorithm {s:?} (expected low-temp, high-temp or replica-exchange)"
                ))
            })
    }
}

/// Starting point of every particle in a run.
#[derive(Debug, Clone, PartialEq)]
pub enum InitSpec {
    Point(Vec<f64>),
    /// Each coordinate uniform on `[lower, upper]`, drawn per replicate.
    UniformBox {
        lower: f64,
        upper: f64,
    },
}

impl InitSpec {
    /// The starting point for replicate `replicate`.
    pub fn sample(&self, dimension: usize, seed: u64, replicate: u64) -> Vec<f64> {
        match self {
            InitSpec::Point(p) => p.clone(),
            InitSpec::UniformBox { lower, upper } => {
                let mut rng = RngStream::for_chain(seed, Purpose::Init, replicate);
                (0..dimension)
                    .map(|_| lower + (upper - lower) * rng.uniform())
                    .collect()
            }
        }
    }

    fn validate(&self, dimension: usize) -> Result<()> {
        match self {
            InitSpec::Point(p) if p.len() != dimension => Err(Error::Config(format!(
                "initial point has {} coordinates but the objective has dimension {dimension}",
                p.len()
            ))),
            InitSpec::Point(p) if p.iter().any(|v| !v.is_finite()) => {
                Err(Error::Config("initial point must be finite".into()))
            }
            InitSpec::UniformBox { lower, upper }
                if !(lower.is_finite() && upper.is_finite() && lower < upper) =>
            {
                Err(Error::Config(format!(
                    "invalid initialization box [{lower}, {upper}]"
                )))
            }
            _ => Ok(()),
        }
    }
}

/// Default number of iterations between stored trace records.
pub const DEFAULT_STRIDE: u64 = 10;

/// One experiment: objective, dynamics, and replication settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub objective: ObjectiveSpec,
    pub tau1: f64,
    pub tau2: f64,
    pub intensity: f64,
    pub eta: f64,
    pub steps: u64,
    /// Independent runs (seeds) per algorithm.
    pub replicates: usize,
    pub seed: u64,
    pub init: InitSpec,
    pub algorithm: Algorithm,
    pub formulation: Formulation,
    pub stride: u64,
}

impl SimConfig {
    /// Benchmark defaults: the 25-well mixture at κ = 0.1 started from
    /// (2, 2), (τ₁, τ₂) = (0.01, 1), a = 1, η = 0.01, 10000 steps, 20 seeds.
    pub fn benchmark() -> Self {
        Self {
            objective: ObjectiveSpec::Mixture(crate::objective::GaussianMixtureSpec::benchmark(
                0.1,
            )),
            tau1: 0.01,
            tau2: 1.0,
            intensity: 1.0,
            eta: 0.01,
            steps: 10_000,
            replicates: 20,
            seed: crate::DEFAULT_SEED,
            init: InitSpec::Point(vec![2.0, 2.0]),
            algorithm: Algorithm::ReplicaExchange,
            formulation: Formulation::TemperatureSwap,
            stride: DEFAULT_STRIDE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive, got {v}")))
            }
        };
        positive("tau1", self.tau1)?;
        positive("tau2", self.tau2)?;
        positive("eta", self.eta)?;
        if self.algorithm == Algorithm::ReplicaExchange && !(self.tau1 < self.tau2) {
            return Err(Error::Config(format!(
                "replica exchange needs tau1 < tau2, got {} and {}",
                self.tau1, self.tau2
            )));
        }
        if !(self.intensity >= 0.0 && self.intensity.is_finite()) {
            return Err(Error::Config(format!(
                "intensity must be nonnegative, got {}",
                self.intensity
            )));
        }
        if self.steps == 0 {
            return Err(Error::Config("steps must be positive".into()));
        }
        if self.replicates == 0 {
            return Err(Error::Config("replicates must be positive".into()));
        }
        if self.stride == 0 {
            return Err(Error::Config("stride must be positive".into()));
        }
        self.init.validate(self.objective.dimension())
    }

    /// Time horizon `steps · η`.
    pub fn horizon(&self) -> f64 {
        self.steps as f64 * self.eta
    }
}
