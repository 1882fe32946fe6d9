//! Single-chain unadjusted Langevin algorithm (explicit Euler–Maruyama).
//!
//! One step is `x ← x − η∇U(x) + √(2ητ)·ξ` with `ξ ~ N(0, I_d)`. There is no
//! Metropolis correction.

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::rng::RngStream;
use crate::trace::{Trace, TraceRecorder};

/// Any coordinate with magnitude above this aborts the run.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;

pub(crate) type Scratch = SmallVec<[f64; 4]>;

#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub position: Vec<f64>,
    pub temperature: f64,
    pub iteration: u64,
}

impl ChainState {
    pub fn new(position: Vec<f64>, temperature: f64) -> Self {
        Self {
            position,
            temperature,
            iteration: 0,
        }
    }
}

pub(crate) fn check_stepsize(eta: f64) -> Result<()> {
    if eta > 0.0 && eta.is_finite() {
        Ok(())
    } else {
        Err(Error::Input(format!(
            "stepsize must be positive, got {eta}"
        )))
    }
}

pub(crate) fn check_temperature(tau: f64) -> Result<()> {
    if tau >= 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::Input(format!(
            "temperature must be nonnegative, got {tau}"
        )))
    }
}

pub(crate) fn check_dimension(f: &dyn Objective, x: &[f64]) -> Result<()> {
    if f.dimension() == x.len() {
        Ok(())
    } else {
        Err(Error::Input(format!(
            "point has dimension {} but the objective expects {}",
            x.len(),
            f.dimension()
        )))
    }
}

fn check_finite(position: &[f64], iteration: u64) -> Result<()> {
    if position
        .iter()
        .all(|v| v.is_finite() && v.abs() <= DIVERGENCE_THRESHOLD)
    {
        Ok(())
    } else {
        Err(Error::Divergence { iteration })
    }
}

/// Euler–Maruyama update in place, drawing `d` Gaussians from `rng`.
/// `iteration` is the index of the new iterate (used in divergence errors).
pub(crate) fn advance(
    position: &mut [f64],
    f: &dyn Objective,
    eta: f64,
    temperature: f64,
    rng: &mut RngStream,
    iteration: u64,
) -> Result<()> {
    let mut grad: Scratch = SmallVec::from_elem(0.0, position.len());
    f.gradient(position, &mut grad);
    let scale = (2.0 * eta * temperature).sqrt();
    for (x, g) in position.iter_mut().zip(&grad) {
        *x += -eta * g + scale * rng.gaussian();
    }
    check_finite(position, iteration)
}

/// Euler–Maruyama update driven by a given Brownian increment `dw`
/// (variance `eta` per coordinate): `x ← x − η∇U(x) + √(2τ)·dw`.
pub(crate) fn advance_with_increment(
    position: &mut [f64],
    f: &dyn Objective,
    eta: f64,
    temperature: f64,
    dw: &[f64],
    iteration: u64,
) -> Result<()> {
    let mut grad: Scratch = SmallVec::from_elem(0.0, position.len());
    f.gradient(position, &mut grad);
    let scale = (2.0 * temperature).sqrt();
    for ((x, g), w) in position.iter_mut().zip(&grad).zip(dw) {
        *x += -eta * g + scale * w;
    }
    check_finite(position, iteration)
}

/// One Langevin step at the chain's temperature. Consumes exactly `d`
/// Gaussian draws.
pub fn langevin_step(
    state: &ChainState,
    f: &dyn Objective,
    eta: f64,
    rng: &mut RngStream,
) -> Result<ChainState> {
    check_stepsize(eta)?;
    check_temperature(state.temperature)?;
    check_dimension(f, &state.position)?;
    let mut next = state.clone();
    next.iteration += 1;
    advance(
        &mut next.position,
        f,
        eta,
        next.temperature,
        rng,
        next.iteration,
    )?;
    Ok(next)
}

/// Runs `steps` Langevin steps from `init`, recording every iterate.
pub fn run_chain(
    init: &[f64],
    f: &dyn Objective,
    tau: f64,
    eta: f64,
    steps: u64,
    rng: &mut RngStream,
) -> Result<Trace> {
    run_chain_thinned(init, f, tau, eta, steps, 1, rng)
}

/// As [`run_chain`], storing every `stride`-th iterate (plus the last one).
/// The best-so-far column still tracks every iterate.
pub fn run_chain_thinned(
    init: &[f64],
    f: &dyn Objective,
    tau: f64,
    eta: f64,
    steps: u64,
    stride: u64,
    rng: &mut RngStream,
) -> Result<Trace> {
    if steps == 0 {
        return Err(Error::Input("a run needs at least one step".into()));
    }
    check_stepsize(eta)?;
    check_temperature(tau)?;
    check_dimension(f, init)?;
    check_finite(init, 0)?;

    let mut x = init.to_vec();
    let mut rec = TraceRecorder::new(stride, steps);
    rec.observe(0, f.value(&x), || vec![x.clone()], || vec![tau]);
    for k in 1..=steps {
        advance(&mut x, f, eta, tau, rng, k)?;
        let u = f.value(&x);
        rec.observe(k, u, || vec![x.clone()], || vec![tau]);
    }
    Ok(rec.finish())
}
