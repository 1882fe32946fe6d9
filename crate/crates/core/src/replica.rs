//! Two-particle replica exchange.
//!
//! Two particles follow Langevin dynamics at temperatures `τ₁ < τ₂`. After
//! each Euler–Maruyama step the pair exchanges with probability
//! `a·η·s(Z¹(k), Z²(k))`, where
//!
//! ```text
//! s = exp(min(0, (1/τ₁ − 1/τ₂)·(U(x₁) − U(x₂))))
//! ```
//!
//! is evaluated at the positions *before* the step. Exchange is implemented in
//! two equivalent ways: [`replica_step`] swaps the temperatures carried by the
//! particles, [`position_swap_step`] keeps temperatures fixed and swaps the
//! positions. Both leave the product Gibbs law `∝ exp(−U(x₁)/τ₁ − U(x₂)/τ₂)`
//! invariant in continuous time.

use std::sync::Once;

use crate::error::{Error, Result};
use crate::langevin::{advance, check_dimension, check_stepsize, check_temperature};
use crate::objective::Objective;
use crate::rng::{Purpose, RngStream};
use crate::trace::{Trace, TraceRecorder};

/// Swap rate `exp(min(0, (1/τ₁ − 1/τ₂)(u₁ − u₂)))`, always in `(0, 1]`.
///
/// The expression is symmetric under relabelling both particles, so it may be
/// called with the temperatures the particles currently carry.
pub fn swap_rate(u1: f64, u2: f64, tau1: f64, tau2: f64) -> Result<f64> {
    if !(u1.is_finite() && u2.is_finite()) {
        return Err(Error::Input(format!(
            "objective values must be finite, got {u1} and {u2}"
        )));
    }
    if !(tau1 > 0.0 && tau2 > 0.0 && tau1.is_finite() && tau2.is_finite()) {
        return Err(Error::Input(format!(
            "temperatures must be positive, got {tau1} and {tau2}"
        )));
    }
    let exponent = (1.0 / tau1 - 1.0 / tau2) * (u1 - u2);
    // min(0, ·) also maps a 0·∞ NaN (never produced for finite inputs) to 0.
    Ok(exponent.min(0.0).exp())
}

static CLAMP_WARNING: Once = Once::new();

/// Swap intensity `a` and the stepsize it is paired with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwapPolicy {
    intensity: f64,
    eta: f64,
}

impl SwapPolicy {
    /// Fails on negative intensity or nonpositive stepsize. When `a·η ≥ 1`
    /// the per-step swap probability can exceed one; it is clamped and a
    /// warning is logged once per process.
    pub fn new(intensity: f64, eta: f64) -> Result<Self> {
        if !(intensity >= 0.0 && intensity.is_finite()) {
            return Err(Error::Input(format!(
                "swap intensity must be nonnegative, got {intensity}"
            )));
        }
        check_stepsize(eta)?;
        let policy = Self { intensity, eta };
        if policy.is_clamped() {
            CLAMP_WARNING.call_once(|| {
                log::warn!(
                    "swap intensity × stepsize = {} ≥ 1; swap probabilities are clamped to 1",
                    intensity * eta
                );
            });
        }
        Ok(policy)
    }

    pub fn intensity(&self) -> f64 {
        self.intensity
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// True when `a·η ≥ 1`, i.e. the probability may be clamped.
    pub fn is_clamped(&self) -> bool {
        self.intensity * self.eta >= 1.0
    }

    /// `clamp(a·η·rate, 0, 1)`.
    pub fn probability(&self, rate: f64) -> f64 {
        (self.intensity * self.eta * rate).clamp(0.0, 1.0)
    }
}

/// Bernoulli trial with probability `clamp(a·η·rate, 0, 1)`. Consumes exactly
/// one uniform.
pub fn swap_decision(rate: f64, policy: &SwapPolicy, rng: &mut RngStream) -> bool {
    rng.uniform() < policy.probability(rate)
}

/// Positions and current temperatures of the coupled pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicaState {
    pub pos1: Vec<f64>,
    pub pos2: Vec<f64>,
    pub temp1: f64,
    pub temp2: f64,
    pub iteration: u64,
    pub swap_count: u64,
}

impl ReplicaState {
    pub fn new(pos1: Vec<f64>, pos2: Vec<f64>, tau1: f64, tau2: f64) -> Self {
        Self {
            pos1,
            pos2,
            temp1: tau1,
            temp2: tau2,
            iteration: 0,
            swap_count: 0,
        }
    }

    /// Both particles start at the same point.
    pub fn from_point(init: &[f64], tau1: f64, tau2: f64) -> Self {
        Self::new(init.to_vec(), init.to_vec(), tau1, tau2)
    }

    /// `(position at the lower temperature, position at the higher one)`.
    pub fn by_temperature(&self) -> (&[f64], &[f64]) {
        if self.temp1 <= self.temp2 {
            (&self.pos1, &self.pos2)
        } else {
            (&self.pos2, &self.pos1)
        }
    }

    fn validate(&self, f: &dyn Objective) -> Result<()> {
        check_temperature(self.temp1)?;
        check_temperature(self.temp2)?;
        check_dimension(f, &self.pos1)?;
        check_dimension(f, &self.pos2)
    }
}

/// The optimization iterate: the position of whichever particle currently
/// holds the lower temperature.
pub fn low_temperature_position(state: &ReplicaState) -> &[f64] {
    state.by_temperature().0
}

/// The three independent streams one replica pair consumes.
#[derive(Debug, Clone)]
pub struct ReplicaStreams {
    pub noise1: RngStream,
    pub noise2: RngStream,
    pub swap: RngStream,
}

impl ReplicaStreams {
    pub fn for_chain(seed: u64, chain: u64) -> Self {
        Self {
            noise1: RngStream::for_chain(seed, Purpose::Noise1, chain),
            noise2: RngStream::for_chain(seed, Purpose::Noise2, chain),
            swap: RngStream::for_chain(seed, Purpose::Swap, chain),
        }
    }

    pub(crate) fn step(
        &mut self,
        state: &mut ReplicaState,
        f: &dyn Objective,
        policy: &SwapPolicy,
        formulation: Formulation,
    ) -> Result<bool> {
        step_in_place(
            state,
            f,
            policy,
            &mut self.noise1,
            &mut self.noise2,
            &mut self.swap,
            formulation,
        )
    }
}

/// Which quantity is exchanged on a swap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Formulation {
    /// Particles keep positions and exchange temperatures.
    #[default]
    TemperatureSwap,
    /// Temperatures stay with the slots and positions are exchanged.
    PositionSwap,
}

/// One step in place. Returns whether a swap fired.
pub(crate) fn step_in_place(
    state: &mut ReplicaState,
    f: &dyn Objective,
    policy: &SwapPolicy,
    rng1: &mut RngStream,
    rng2: &mut RngStream,
    rng_swap: &mut RngStream,
    formulation: Formulation,
) -> Result<bool> {
    let rate = swap_rate(
        f.value(&state.pos1),
        f.value(&state.pos2),
        state.temp1,
        state.temp2,
    )
    .map_err(|_| Error::Divergence {
        iteration: state.iteration,
    })?;
    let next = state.iteration + 1;
    advance(&mut state.pos1, f, policy.eta(), state.temp1, rng1, next)?;
    advance(&mut state.pos2, f, policy.eta(), state.temp2, rng2, next)?;
    let swapped = swap_decision(rate, policy, rng_swap);
    if swapped {
        match formulation {
            Formulation::TemperatureSwap => std::mem::swap(&mut state.temp1, &mut state.temp2),
            Formulation::PositionSwap => std::mem::swap(&mut state.pos1, &mut state.pos2),
        }
        state.swap_count += 1;
    }
    state.iteration = next;
    Ok(swapped)
}

fn checked_step(
    state: &ReplicaState,
    f: &dyn Objective,
    policy: &SwapPolicy,
    rng1: &mut RngStream,
    rng2: &mut RngStream,
    rng_swap: &mut RngStream,
    formulation: Formulation,
) -> Result<ReplicaState> {
    state.validate(f)?;
    let mut next = state.clone();
    step_in_place(&mut next, f, policy, rng1, rng2, rng_swap, formulation)?;
    Ok(next)
}

/// Temperature-swapping step: both particles take one Euler–Maruyama step at
/// their current temperatures, then exchange temperatures with probability
/// `a·η·s` evaluated at the pre-step positions.
pub fn replica_step(
    state: &ReplicaState,
    f: &dyn Objective,
    policy: &SwapPolicy,
    rng1: &mut RngStream,
    rng2: &mut RngStream,
    rng_swap: &mut RngStream,
) -> Result<ReplicaState> {
    checked_step(
        state,
        f,
        policy,
        rng1,
        rng2,
        rng_swap,
        Formulation::TemperatureSwap,
    )
}

/// Position-swapping step: as [`replica_step`] but the positions are
/// exchanged and temperatures stay put.
pub fn position_swap_step(
    state: &ReplicaState,
    f: &dyn Objective,
    policy: &SwapPolicy,
    rng1: &mut RngStream,
    rng2: &mut RngStream,
    rng_swap: &mut RngStream,
) -> Result<ReplicaState> {
    checked_step(
        state,
        f,
        policy,
        rng1,
        rng2,
        rng_swap,
        Formulation::PositionSwap,
    )
}

/// Advances `state` by `steps` without recording. Returns the final state.
pub fn advance_replica(
    mut state: ReplicaState,
    f: &dyn Objective,
    policy: &SwapPolicy,
    streams: &mut ReplicaStreams,
    formulation: Formulation,
    steps: u64,
) -> Result<ReplicaState> {
    state.validate(f)?;
    for _ in 0..steps {
        streams.step(&mut state, f, policy, formulation)?;
    }
    Ok(state)
}

/// Runs a replica pair for `steps` iterations, recording the low-temperature
/// iterate every `stride` iterations.
pub fn run_replica(
    init: ReplicaState,
    f: &dyn Objective,
    policy: &SwapPolicy,
    streams: &mut ReplicaStreams,
    formulation: Formulation,
    steps: u64,
    stride: u64,
) -> Result<Trace> {
    if steps == 0 {
        return Err(Error::Input("a run needs at least one step".into()));
    }
    init.validate(f)?;
    let mut state = init;
    let mut rec = TraceRecorder::new(stride, state.iteration + steps);
    let snapshot = |s: &ReplicaState| vec![s.pos1.clone(), s.pos2.clone()];
    rec.observe(
        state.iteration,
        f.value(low_temperature_position(&state)),
        || snapshot(&state),
        || vec![state.temp1, state.temp2],
    );
    for _ in 0..steps {
        if streams.step(&mut state, f, policy, formulation)? {
            rec.swap(state.iteration);
        }
        rec.observe(
            state.iteration,
            f.value(low_temperature_position(&state)),
            || snapshot(&state),
            || vec![state.temp1, state.temp2],
        );
    }
    Ok(rec.finish())
}
